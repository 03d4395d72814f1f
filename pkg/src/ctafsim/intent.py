"""Trajectory forecasting for other traffic.

A rule cascade replaces a learned predictor: a declared radio intent pins the
forecast to the announced runway (high confidence), an aircraft established in
the pattern is assumed to continue around it (medium), and anything else is
extrapolated on a straight line (low). Wind enters only through the runway a
pattern flier is assumed to be using.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import route as route_mod
from .dynamics import (
    AircraftState,
    ControlLimits,
    DEFAULT_LIMITS,
    WaypointFollower,
    apply_primitive,
    landed,
)
from .geo import (
    AirfieldModel,
    LocalPoint,
    WindState,
    classify_leg,
    preferred_runway,
)
from .radio import IntentKind, NO_INTENT, PilotIntent

FORECAST_STRIDE_S = 5.0
FORECAST_HORIZON_S = 60.0
MAX_HORIZON_S = 120.0

CONFIDENCE_DECLARED = 0.9
CONFIDENCE_PATTERN = 0.7
CONFIDENCE_LINEAR = 0.5


class ForecastMode:
    LINEAR = "linear"
    PATTERN = "pattern"
    DECLARED = "declared"


@dataclass(slots=True)
class TrajectoryForecast:
    agent_id: str
    samples: list[tuple[float, LocalPoint]]
    mode: str
    confidence: float

    def position_at(self, time_s: float) -> LocalPoint:
        """Sample lookup with nearest-sample clamping at the ends."""
        if not self.samples:
            raise ValueError("empty forecast")
        best = min(self.samples, key=lambda s: abs(s[0] - time_s))
        return best[1]

    def validate(self) -> None:
        times = [t for t, _ in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("forecast samples not strictly increasing in time")
        if times and times[-1] - times[0] > MAX_HORIZON_S:
            raise ValueError("forecast exceeds the maximum horizon")


@dataclass(slots=True)
class AgentBelief:
    """What the ego pilot knows about one other aircraft."""

    agent_id: str
    last_state: AircraftState
    declared_intent: PilotIntent = NO_INTENT
    intent_time_s: float = -1.0
    assumed_runway: Optional[str] = None

    def heard(self, intent: PilotIntent, time_s: float) -> None:
        if time_s < self.intent_time_s:
            return  # stale; belief updates are monotone in time
        self.declared_intent = intent
        self.intent_time_s = time_s
        if intent.runway is not None:
            self.assumed_runway = intent.runway


def _check_stride(horizon_s: float, stride_s: float) -> int:
    if stride_s <= 0 or horizon_s <= 0:
        raise ValueError("horizon and stride must be positive")
    steps = horizon_s / stride_s
    if abs(steps - round(steps)) > 1e-9:
        raise ValueError(f"stride {stride_s} does not divide horizon {horizon_s}")
    return int(round(steps))


def predict_linear(
    state: AircraftState,
    horizon_s: float = FORECAST_HORIZON_S,
    stride_s: float = FORECAST_STRIDE_S,
    agent_id: str = "",
) -> TrajectoryForecast:
    """Constant ground-velocity extrapolation with the vertical rate frozen."""
    n = _check_stride(horizon_s, stride_s)
    vx = state.speed_mps * math.sin(math.radians(state.heading_deg))
    vy = state.speed_mps * math.cos(math.radians(state.heading_deg))
    samples = []
    for k in range(1, n + 1):
        t = k * stride_s
        samples.append((
            state.time_s + t,
            LocalPoint(
                state.position.x + vx * t,
                state.position.y + vy * t,
                max(0.0, state.position.z + state.vertical_rate_mps * t),
            ),
        ))
    return TrajectoryForecast(agent_id, samples, ForecastMode.LINEAR, CONFIDENCE_LINEAR)


def _simulate_route(
    state: AircraftState,
    waypoints: list[LocalPoint],
    loop: bool,
    threshold: Optional[LocalPoint],
    horizon_s: float,
    stride_s: float,
    limits: ControlLimits,
) -> list[tuple[float, LocalPoint]]:
    """Fly the route forward with the waypoint follower; freeze after landing."""
    n = _check_stride(horizon_s, stride_s)
    follower = WaypointFollower(waypoints, loop=loop)
    current = state
    samples: list[tuple[float, LocalPoint]] = []
    down = False
    for _ in range(n):
        if not down:
            prim = follower.next_primitive(current, limits)
            current = apply_primitive(current, prim, limits)
            if threshold is not None and landed(current, threshold):
                down = True
        else:
            current = AircraftState(
                position=current.position,
                heading_deg=current.heading_deg,
                speed_mps=0.0,
                time_s=current.time_s + stride_s,
            )
        samples.append((current.time_s, current.position))
    return samples


def predict_declared(
    belief: AgentBelief,
    airfield: AirfieldModel,
    wind: WindState,
    horizon_s: float = FORECAST_HORIZON_S,
    stride_s: float = FORECAST_STRIDE_S,
    limits: ControlLimits = DEFAULT_LIMITS,
) -> TrajectoryForecast:
    """Forecast pinned to the agent's announced intent and runway."""
    intent = belief.declared_intent
    if intent.kind is IntentKind.NONE or intent.runway is None:
        return predict_pattern(belief, airfield, wind, horizon_s, stride_s, limits)
    runway = airfield.runway(intent.runway)
    state = belief.last_state
    waypoints, loop = route_mod.goal_route(
        airfield, runway, state.position, state.heading_deg, intent.kind
    )
    threshold = runway.threshold if intent.kind in (
        IntentKind.LANDING, IntentKind.CHANGE_RUNWAY
    ) else None
    samples = _simulate_route(state, waypoints, loop, threshold, horizon_s, stride_s, limits)
    return TrajectoryForecast(
        belief.agent_id, samples, ForecastMode.DECLARED, CONFIDENCE_DECLARED
    )


def predict_pattern(
    belief: AgentBelief,
    airfield: AirfieldModel,
    wind: WindState,
    horizon_s: float = FORECAST_HORIZON_S,
    stride_s: float = FORECAST_STRIDE_S,
    limits: ControlLimits = DEFAULT_LIMITS,
) -> TrajectoryForecast:
    """Continuation around the pattern of the assumed (or wind-preferred)
    runway; falls back to linear extrapolation outside the pattern."""
    state = belief.last_state
    runway = (
        airfield.runway(belief.assumed_runway)
        if belief.assumed_runway is not None
        else preferred_runway(airfield, wind)
    )
    if classify_leg(airfield, runway, state.position, state.heading_deg) is None:
        return predict_linear(state, horizon_s, stride_s, belief.agent_id)
    waypoints, loop = route_mod.goal_route(
        airfield, runway, state.position, state.heading_deg, IntentKind.REMAIN_IN_PATTERN
    )
    samples = _simulate_route(state, waypoints, loop, None, horizon_s, stride_s, limits)
    return TrajectoryForecast(
        belief.agent_id, samples, ForecastMode.PATTERN, CONFIDENCE_PATTERN
    )


def predict(
    belief: AgentBelief,
    airfield: AirfieldModel,
    wind: WindState,
    horizon_s: float = FORECAST_HORIZON_S,
    stride_s: float = FORECAST_STRIDE_S,
    limits: ControlLimits = DEFAULT_LIMITS,
) -> TrajectoryForecast:
    """The full cascade: declared intent, then pattern, then linear."""
    if belief.declared_intent.kind is not IntentKind.NONE and \
            belief.declared_intent.runway is not None:
        return predict_declared(belief, airfield, wind, horizon_s, stride_s, limits)
    return predict_pattern(belief, airfield, wind, horizon_s, stride_s, limits)
