"""Kinematic fixed-wing model, motion primitives, and Dubins waypoint following.

The model is a unicycle with altitude: heading turns at a fixed rate, position
advances along the mid-step heading (keeping turn circles exact to first
order), speed slews toward a commanded target, vertical rate is commanded
directly. No wind drift, no stall, no ground roll.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from . import dubins
from .geo import LocalPoint, bearing_between, heading_diff_deg


class Turn(Enum):
    STRAIGHT = "straight"
    LEFT = "left"
    RIGHT = "right"


class Vertical(Enum):
    LEVEL = "level"
    CLIMB = "climb"
    DESCEND = "descend"


class SpeedCmd(Enum):
    HOLD = "hold"
    SLOW = "slow"
    FAST = "fast"


class BankState(Enum):
    LEVEL = "level"
    TURNING_LEFT = "turning_left"
    TURNING_RIGHT = "turning_right"


@dataclass(slots=True)
class ControlLimits:
    min_speed_mps: float = 25.0
    cruise_speed_mps: float = 50.0
    max_speed_mps: float = 60.0
    max_turn_rate_dps: float = 3.0
    max_climb_mps: float = 3.5
    max_descent_mps: float = 5.0
    accel_mps2: float = 1.0

    def validate(self) -> None:
        if not (0 < self.min_speed_mps <= self.cruise_speed_mps <= self.max_speed_mps):
            raise ValueError("speed limits must satisfy 0 < min <= cruise <= max")
        if self.max_turn_rate_dps <= 0:
            raise ValueError("turn rate must be positive")
        if self.max_climb_mps <= 0 or self.max_descent_mps <= 0:
            raise ValueError("climb/descent rates must be positive")

    def turn_radius_m(self, speed_mps: float) -> float:
        speed = max(speed_mps, self.min_speed_mps)
        return speed / math.radians(self.max_turn_rate_dps)


DEFAULT_LIMITS = ControlLimits()

PRIMITIVE_DURATION_S = 5.0


@dataclass(slots=True, frozen=True)
class MotionPrimitive:
    id: int
    turn: Turn
    vertical: Vertical
    speed_cmd: SpeedCmd
    duration_s: float = PRIMITIVE_DURATION_S


def default_primitive_set(limits: ControlLimits) -> list[MotionPrimitive]:
    """The fixed planning alphabet: 3 turns x 3 verticals at held speed, plus
    straight-and-level slow/fast. The all-neutral primitive is id 0."""
    limits.validate()
    prims: list[MotionPrimitive] = []
    for turn in (Turn.STRAIGHT, Turn.LEFT, Turn.RIGHT):
        for vert in (Vertical.LEVEL, Vertical.CLIMB, Vertical.DESCEND):
            prims.append(MotionPrimitive(len(prims), turn, vert, SpeedCmd.HOLD))
    prims.append(MotionPrimitive(len(prims), Turn.STRAIGHT, Vertical.LEVEL, SpeedCmd.SLOW))
    prims.append(MotionPrimitive(len(prims), Turn.STRAIGHT, Vertical.LEVEL, SpeedCmd.FAST))
    return prims


NEUTRAL_PRIMITIVE = MotionPrimitive(0, Turn.STRAIGHT, Vertical.LEVEL, SpeedCmd.HOLD)


@dataclass(slots=True)
class AircraftState:
    position: LocalPoint
    heading_deg: float
    speed_mps: float
    vertical_rate_mps: float = 0.0
    bank_state: BankState = BankState.LEVEL
    time_s: float = 0.0

    def validate(self) -> None:
        self.position.validate()
        for v in (self.heading_deg, self.speed_mps, self.vertical_rate_mps, self.time_s):
            if not math.isfinite(v):
                raise ValueError(f"non-finite aircraft state field: {self}")


def _decode(
    primitive: MotionPrimitive, limits: ControlLimits
) -> tuple[float, float, Optional[float]]:
    """(turn rate deg/s, commanded vertical rate m/s, speed target or None)."""
    if primitive.turn is Turn.LEFT:
        turn_dps = -limits.max_turn_rate_dps
    elif primitive.turn is Turn.RIGHT:
        turn_dps = limits.max_turn_rate_dps
    else:
        turn_dps = 0.0
    if primitive.vertical is Vertical.CLIMB:
        vz_cmd = limits.max_climb_mps
    elif primitive.vertical is Vertical.DESCEND:
        vz_cmd = -limits.max_descent_mps
    else:
        vz_cmd = 0.0
    if primitive.speed_cmd is SpeedCmd.SLOW:
        target = limits.min_speed_mps
    elif primitive.speed_cmd is SpeedCmd.FAST:
        target = limits.max_speed_mps
    else:
        target = None
    return turn_dps, vz_cmd, target


def _advance(
    x: float, y: float, z: float, hdg: float, spd: float,
    primitive: MotionPrimitive, dt: float, limits: ControlLimits,
) -> tuple[float, float, float, float, float, float]:
    """One integration substep on plain floats. Returns (x, y, z, hdg, spd, vz)."""
    turn_dps, vz_cmd, target = _decode(primitive, limits)
    turn = turn_dps * dt
    mid = math.radians(hdg + turn / 2.0)
    x += spd * dt * math.sin(mid)
    y += spd * dt * math.cos(mid)
    hdg = (hdg + turn) % 360.0

    new_z = max(0.0, z + vz_cmd * dt)
    vz = (new_z - z) / dt
    z = new_z

    if target is not None:
        dv = max(-limits.accel_mps2 * dt, min(limits.accel_mps2 * dt, target - spd))
        spd = max(0.0, min(limits.max_speed_mps, spd + dv))
    return x, y, z, hdg, spd, vz


_BANK_FOR_TURN = {
    Turn.STRAIGHT: BankState.LEVEL,
    Turn.LEFT: BankState.TURNING_LEFT,
    Turn.RIGHT: BankState.TURNING_RIGHT,
}


def step(
    state: AircraftState,
    primitive: MotionPrimitive,
    dt: float,
    limits: ControlLimits = DEFAULT_LIMITS,
) -> AircraftState:
    """Advance one substep of at most 1 s. Deterministic; clamps to limits."""
    if not (0.0 < dt <= 1.0):
        raise ValueError(f"dt must be in (0, 1] s, got {dt}")
    state.validate()
    x, y, z, hdg, spd, vz = _advance(
        state.position.x, state.position.y, state.position.z,
        state.heading_deg, state.speed_mps, primitive, dt, limits,
    )
    return AircraftState(
        position=LocalPoint(x, y, z),
        heading_deg=hdg,
        speed_mps=spd,
        vertical_rate_mps=vz,
        bank_state=_BANK_FOR_TURN[primitive.turn],
        time_s=state.time_s + dt,
    )


def apply_primitive(
    state: AircraftState,
    primitive: MotionPrimitive,
    limits: ControlLimits = DEFAULT_LIMITS,
    substep_s: float = 1.0,
) -> AircraftState:
    """Apply a primitive for its full duration in 1 s substeps."""
    out = state
    remaining = primitive.duration_s
    while remaining > 1e-9:
        dt = min(substep_s, remaining)
        out = step(out, primitive, dt, limits)
        remaining -= dt
    return out


def dubins_path(
    start: tuple[float, float, float],
    goal: tuple[float, float, float],
    turn_radius_m: float,
) -> dubins.DubinsPath:
    """Shortest Dubins path between (x, y, heading_deg) poses."""
    return dubins.shortest_path(start, goal, turn_radius_m)


CAPTURE_RADIUS_M = 150.0

# a waypoint also counts as passed once the aircraft crosses its abeam plane
# (perpendicular to the outbound course) within this lateral miss; otherwise
# a quantized turn that misses the capture circle orbits the corner forever.
# Sized to cover worst-case corner overshoot while not sequencing early from
# the adjacent leg.
PASS_ABEAM_LATERAL_M = 500.0


def passed_abeam(active: LocalPoint, following: LocalPoint, position: LocalPoint,
                 lateral_bound_m: float = PASS_ABEAM_LATERAL_M) -> bool:
    ux, uy = following.x - active.x, following.y - active.y
    norm = math.hypot(ux, uy)
    if norm < 1e-9:
        return False
    ux, uy = ux / norm, uy / norm
    dx, dy = position.x - active.x, position.y - active.y
    along = dx * ux + dy * uy
    lateral = abs(dx * uy - dy * ux)
    return along > 0.0 and lateral <= lateral_bound_m


def _substep_points(
    state: AircraftState, primitive: MotionPrimitive, limits: ControlLimits
) -> list[tuple[float, float, float]]:
    """(x, y, z) at each 1 s substep of one primitive, without allocations."""
    x, y, z = state.position.x, state.position.y, state.position.z
    hdg, spd = state.heading_deg, state.speed_mps
    turn_dps, vz_cmd, target = _decode(primitive, limits)
    amax = limits.accel_mps2
    vmax = limits.max_speed_mps
    sin, cos, radians = math.sin, math.cos, math.radians
    points: list[tuple[float, float, float]] = []
    remaining = primitive.duration_s
    while remaining > 1e-9:
        dt = min(1.0, remaining)
        turn = turn_dps * dt
        mid = radians(hdg + turn * 0.5)
        x += spd * dt * sin(mid)
        y += spd * dt * cos(mid)
        hdg += turn
        z = max(0.0, z + vz_cmd * dt)
        if target is not None:
            dv = max(-amax * dt, min(amax * dt, target - spd))
            spd = max(0.0, min(vmax, spd + dv))
        remaining -= dt
        points.append((x, y, z))
    return points


def select_primitive(
    state: AircraftState,
    active: LocalPoint,
    after: Optional[LocalPoint],
    limits: ControlLimits,
    primitives: Sequence[MotionPrimitive],
    final_target: Optional[LocalPoint] = None,
) -> MotionPrimitive:
    """Pick the primitive whose one-step application best tracks the Dubins
    path toward the active waypoint (cross-track plus altitude error).

    Cross-track is averaged over the substeps of the primitive, so a turn
    that merely ends on the path cannot beat flying along it (no slalom).
    The cost factors exactly: the horizontal track depends only on the turn
    and speed command, the altitude endpoint only on the vertical one, so
    each component is integrated once instead of per combination.
    """
    radius = limits.turn_radius_m(state.speed_mps)
    start_pose = (state.position.x, state.position.y, state.heading_deg)
    path = None
    direct_heading = bearing_between(
        state.position.x, state.position.y, active.x, active.y
    )
    # try in order: arrive aligned with the next leg; arrive from wherever;
    # then give up on a corner that sits inside the turn circle and steer for
    # the leg after it (abeam sequencing treats the corner as passed)
    targets = [(active, after)]
    if after is not None:
        targets.append((active, None))
        targets.append((after, None))
    else:
        targets.append((active, None))
    for target, following in targets:
        arrive_heading = (
            bearing_between(target.x, target.y, following.x, following.y)
            if following is not None
            else bearing_between(state.position.x, state.position.y, target.x, target.y)
        )
        candidate = dubins.shortest_path(
            start_pose, (target.x, target.y, arrive_heading), radius
        )
        direct = state.position.horizontal_to(target)
        path = candidate
        if direct <= 1.0 or candidate.length_m <= direct + math.pi * radius:
            break
    # energy management: if the eventual descent to the route's destination
    # will outpace the sink rate at present speed, bleed speed now (the
    # pattern-flying habit of slowing abeam rather than diving on final)
    prefer_slow = False
    if final_target is not None and state.speed_mps > 0.5:
        drop = state.position.z - final_target.z
        to_go = state.position.horizontal_to(final_target)
        if drop > 50.0 and to_go > 1.0:
            needed_sink = drop / (to_go / state.speed_mps)
            prefer_slow = needed_sink > 0.9 * limits.max_descent_mps

    xy_cost: dict[Turn, float] = {}
    z_cost: dict[Vertical, float] = {}
    best: Optional[MotionPrimitive] = None
    best_cost = math.inf
    for prim in primitives:
        if prim.turn not in xy_cost:
            # score the turn at held speed: cross-track decides geometry, and
            # changing speed must not game the average by covering less path
            probe = prim if prim.speed_cmd is SpeedCmd.HOLD else MotionPrimitive(
                prim.id, prim.turn, prim.vertical, SpeedCmd.HOLD, prim.duration_s
            )
            points = _substep_points(state, probe, limits)
            xy_cost[prim.turn] = sum(
                path.distance_to(px, py) for px, py, _ in points
            ) / len(points)
        if prim.vertical not in z_cost:
            z = state.position.z
            if prim.vertical is Vertical.CLIMB:
                z = z + limits.max_climb_mps * prim.duration_s
            elif prim.vertical is Vertical.DESCEND:
                z = max(0.0, z - limits.max_descent_mps * prim.duration_s)
            cost_z = abs(z - active.z)
            if prim.vertical is Vertical.DESCEND and abs(
                heading_diff_deg(state.heading_deg, direct_heading)
            ) > 45.0:
                # no descending while pointed away from the target: finish the
                # turn first, then come down on course
                cost_z += 1e6
            z_cost[prim.vertical] = cost_z
        cost = xy_cost[prim.turn] + z_cost[prim.vertical]
        if prefer_slow:
            if prim.speed_cmd is not SpeedCmd.SLOW:
                cost += 1e-6
        elif prim.speed_cmd is not SpeedCmd.HOLD:
            cost += 1e-6  # geometry ties resolve to holding speed
        if cost < best_cost - 1e-9:
            best, best_cost = prim, cost
    assert best is not None
    return best


def follow_waypoints(
    state: AircraftState,
    waypoints: Sequence[LocalPoint],
    limits: ControlLimits = DEFAULT_LIMITS,
    primitives: Optional[Sequence[MotionPrimitive]] = None,
    capture_radius_m: float = CAPTURE_RADIUS_M,
) -> MotionPrimitive:
    """One-shot guidance: the first waypoint beyond the capture radius is the
    active one. Callers that fly a whole route should use WaypointFollower,
    which remembers progress instead of re-deriving it."""
    if not waypoints:
        raise ValueError("follow_waypoints needs at least one waypoint")
    prims = primitives if primitives is not None else default_primitive_set(limits)
    idx = 0
    while (
        idx < len(waypoints) - 1
        and state.position.horizontal_to(waypoints[idx]) <= capture_radius_m
    ):
        idx += 1
    after = waypoints[idx + 1] if idx + 1 < len(waypoints) else None
    return select_primitive(
        state, waypoints[idx], after, limits, prims, final_target=waypoints[-1]
    )


class WaypointFollower:
    """Stateful route tracker: advances the active waypoint on capture and
    optionally loops the route (pattern circuits)."""

    def __init__(
        self,
        waypoints: Sequence[LocalPoint],
        loop: bool = False,
        capture_radius_m: float = CAPTURE_RADIUS_M,
    ):
        if not waypoints:
            raise ValueError("empty route")
        self.waypoints = list(waypoints)
        self.loop = loop
        self.capture_radius_m = capture_radius_m
        self.index = 0

    @property
    def active(self) -> LocalPoint:
        return self.waypoints[self.index]

    @property
    def on_last(self) -> bool:
        return not self.loop and self.index == len(self.waypoints) - 1

    def _peek(self, offset: int) -> Optional[LocalPoint]:
        i = self.index + offset
        if i < len(self.waypoints):
            return self.waypoints[i]
        if self.loop:
            return self.waypoints[i % len(self.waypoints)]
        return None

    def advance(self, position: LocalPoint) -> None:
        for _ in range(len(self.waypoints)):
            if self.on_last:
                return
            captured = position.horizontal_to(self.active) <= self.capture_radius_m
            nxt = self._peek(1)
            if not captured and not (
                nxt is not None and passed_abeam(self.active, nxt, position)
            ):
                return
            self.index += 1
            if self.loop and self.index >= len(self.waypoints):
                self.index = 0

    def next_primitive(
        self,
        state: AircraftState,
        limits: ControlLimits = DEFAULT_LIMITS,
        primitives: Optional[Sequence[MotionPrimitive]] = None,
    ) -> MotionPrimitive:
        self.advance(state.position)
        prims = primitives if primitives is not None else default_primitive_set(limits)
        final = None if self.loop else self.waypoints[-1]
        return select_primitive(
            state, self.active, self._peek(1), limits, prims, final_target=final
        )


def landed(state: AircraftState, threshold: LocalPoint,
           capture_radius_m: float = CAPTURE_RADIUS_M) -> bool:
    """Touchdown test: on the ground within the threshold capture circle."""
    return state.position.z <= 0.0 and state.position.horizontal_to(threshold) <= capture_radius_m
