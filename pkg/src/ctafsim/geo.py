"""Local airfield geometry: flat-earth frame, runways, traffic-pattern shapes.

All positions are in a local ENU frame in meters, centered on the airfield
reference point: x east, y north, z above ground level. Compass bearings are
degrees clockwise from north. Knots and feet exist only at the radio/METAR
boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclasses_field
from enum import Enum
from typing import Optional

KT_TO_MPS = 0.514444
FT_TO_M = 0.3048

# Pattern shape constants (meters). The downwind offset comes from the
# airfield's pattern_width_m; these fix the along-runway extent of the circuit.
# The final leg is long enough to descend from pattern altitude at the
# default descent rate without starting down before the turn to final.
UPWIND_EXTENSION_M = 600.0
FINAL_LENGTH_M = 2600.0

# classify_leg corridor tolerances: heading cone half-angle and lateral bound
# as a multiple of pattern width.
CORRIDOR_HEADING_DEG = 45.0
CORRIDOR_WIDTH_FACTOR = 1.5


def wrap_deg(deg: float) -> float:
    """Normalize an angle to [0, 360)."""
    return deg % 360.0


def heading_diff_deg(a: float, b: float) -> float:
    """Signed smallest difference a - b in (-180, 180]."""
    d = (a - b) % 360.0
    return d - 360.0 if d > 180.0 else d


def bearing_unit(deg: float) -> tuple[float, float]:
    """Unit (east, north) vector pointing along a compass bearing."""
    r = math.radians(deg)
    return math.sin(r), math.cos(r)


def bearing_between(x0: float, y0: float, x1: float, y1: float) -> float:
    """Compass bearing from point 0 to point 1."""
    return math.degrees(math.atan2(x1 - x0, y1 - y0)) % 360.0


def point_segment_distance(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> float:
    """Distance from (px,py) to segment (a, b) in the horizontal plane."""
    abx, aby = bx - ax, by - ay
    apx, apy = px - ax, py - ay
    denom = abx * abx + aby * aby
    if denom <= 0.0:
        return math.hypot(apx, apy)
    t = (apx * abx + apy * aby) / denom
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(apx - t * abx, apy - t * aby)


@dataclass(slots=True)
class LocalPoint:
    """A position in the local airfield frame (meters; z is AGL)."""

    x: float
    y: float
    z: float = 0.0

    def horizontal_to(self, other: "LocalPoint") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def distance_to(self, other: "LocalPoint") -> float:
        return math.sqrt(
            (other.x - self.x) ** 2 + (other.y - self.y) ** 2 + (other.z - self.z) ** 2
        )

    def validate(self) -> None:
        if not all(map(math.isfinite, (self.x, self.y, self.z))):
            raise ValueError(f"non-finite coordinates: {self}")
        if self.z < -1.0:
            raise ValueError(f"altitude below field elevation: z={self.z}")


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


class PatternLeg(Enum):
    UPWIND = "upwind"
    CROSSWIND = "crosswind"
    DOWNWIND = "downwind"
    BASE = "base"
    FINAL = "final"


LEG_ORDER = [
    PatternLeg.UPWIND,
    PatternLeg.CROSSWIND,
    PatternLeg.DOWNWIND,
    PatternLeg.BASE,
    PatternLeg.FINAL,
]


@dataclass(slots=True)
class Runway:
    """One landing direction of a runway strip.

    The designator is the heading rounded to tens ("08" for 080). threshold is
    the landing threshold, i.e. the end the aircraft crosses first.
    """

    designator: str
    threshold: LocalPoint
    heading_deg: float
    length_m: float
    pattern_side: Side = Side.LEFT

    def validate(self) -> None:
        if not (len(self.designator) == 2 and self.designator.isdigit()):
            raise ValueError(f"bad runway designator {self.designator!r}")
        if self.length_m <= 0:
            raise ValueError("runway length must be positive")
        nominal = (int(self.designator) * 10) % 360.0
        if abs(heading_diff_deg(self.heading_deg, nominal)) > 5.0:
            raise ValueError(
                f"runway {self.designator} heading {self.heading_deg} is more than "
                f"5 deg from designator heading {nominal}"
            )

    @property
    def number(self) -> int:
        return int(self.designator)


@dataclass(slots=True)
class WindState:
    """Surface wind. direction_deg is the bearing the wind blows FROM;
    None means variable."""

    direction_deg: Optional[float]
    speed_kt: float
    gust_kt: Optional[float] = None

    @property
    def is_calm(self) -> bool:
        return self.speed_kt <= 0.0 or self.direction_deg is None

    def validate(self) -> None:
        if self.speed_kt < 0:
            raise ValueError("wind speed must be >= 0")
        if self.gust_kt is not None and self.gust_kt < self.speed_kt:
            raise ValueError("gust below steady wind speed")


CALM = WindState(direction_deg=None, speed_kt=0.0)


@dataclass(slots=True)
class AirfieldModel:
    """A non-towered airfield: reciprocal runway pairs plus pattern parameters."""

    name: str
    runways: list[Runway]
    pattern_altitude_m: float
    pattern_width_m: float
    calm_wind_runway: str
    _geom_cache: dict = dataclasses_field(default_factory=dict, repr=False, compare=False)

    def runway(self, designator: str) -> Runway:
        for rwy in self.runways:
            if rwy.designator == designator:
                return rwy
        raise KeyError(f"unknown runway {designator!r} at {self.name}")

    def validate(self) -> None:
        if len(self.runways) < 2:
            raise ValueError("airfield needs at least one reciprocal runway pair")
        if not (150.0 <= self.pattern_altitude_m <= 600.0):
            raise ValueError("pattern altitude out of range [150, 600] m")
        if self.pattern_width_m <= 0:
            raise ValueError("pattern width must be positive")
        for rwy in self.runways:
            rwy.validate()
        self.runway(self.calm_wind_runway)
        for rwy in self.runways:
            if self._reciprocal_of(rwy) is None:
                raise ValueError(f"runway {rwy.designator} has no reciprocal")

    def _reciprocal_of(self, rwy: Runway) -> Optional[Runway]:
        for other in self.runways:
            if other is rwy:
                continue
            if abs(abs(heading_diff_deg(other.heading_deg, rwy.heading_deg)) - 180.0) > 5.0:
                continue
            ux, uy = bearing_unit(rwy.heading_deg)
            far_x = rwy.threshold.x + ux * rwy.length_m
            far_y = rwy.threshold.y + uy * rwy.length_m
            if math.hypot(other.threshold.x - far_x, other.threshold.y - far_y) <= 50.0:
                return other
        return None


def default_airfield() -> AirfieldModel:
    """Two-runway fixture (08/26, both left traffic) used across tests and demos."""
    u_x, u_y = bearing_unit(80.0)
    half = 750.0
    t26 = LocalPoint(half * u_x, half * u_y, 0.0)
    t08 = LocalPoint(-half * u_x, -half * u_y, 0.0)
    field = AirfieldModel(
        name="BUTLER",
        runways=[
            Runway("08", t08, 80.0, 1500.0, Side.LEFT),
            Runway("26", t26, 260.0, 1500.0, Side.LEFT),
        ],
        pattern_altitude_m=300.0,
        pattern_width_m=1000.0,
        calm_wind_runway="26",
    )
    field.validate()
    return field


def leg_headings(runway: Runway) -> dict[PatternLeg, float]:
    """Compass heading flown on each pattern leg for this runway.

    Left traffic turns 90 deg left per leg, right traffic 90 deg right;
    final comes back around to the runway heading.
    """
    step = -90.0 if runway.pattern_side is Side.LEFT else 90.0
    out: dict[PatternLeg, float] = {}
    hdg = runway.heading_deg
    for leg in LEG_ORDER:
        out[leg] = wrap_deg(hdg)
        hdg += step
    return out


def _pattern_frame(runway: Runway):
    """Along-track unit u, offset unit p (toward the pattern side)."""
    u = bearing_unit(runway.heading_deg)
    side = -90.0 if runway.pattern_side is Side.LEFT else 90.0
    p = bearing_unit(runway.heading_deg + side)
    return u, p


def _pattern_point(runway: Runway, s: float, d: float, z: float) -> LocalPoint:
    """Point at along-track s (from threshold, positive past it) and offset d."""
    u, p = _pattern_frame(runway)
    t = runway.threshold
    return LocalPoint(t.x + s * u[0] + d * p[0], t.y + s * u[1] + d * p[1], z)


def labeled_pattern_waypoints(
    airfield: AirfieldModel, runway: Runway
) -> list[tuple[PatternLeg, LocalPoint]]:
    """Pattern circuit waypoints for a runway, tagged with the leg each serves.

    Traces upwind extension, crosswind, downwind (entry / mid / abeam
    threshold), base corner, final intercept, threshold. The circuit holds
    pattern altitude everywhere through the final intercept; the descent
    happens entirely on final, which is sized to make that possible.
    """
    if airfield.runway(runway.designator) is not runway:
        raise KeyError(f"runway {runway.designator} does not belong to {airfield.name}")
    alt = airfield.pattern_altitude_m
    w = airfield.pattern_width_m
    far = runway.length_m + UPWIND_EXTENSION_M
    return [
        (PatternLeg.UPWIND, _pattern_point(runway, far, 0.0, alt)),
        (PatternLeg.CROSSWIND, _pattern_point(runway, far, w / 2.0, alt)),
        (PatternLeg.DOWNWIND, _pattern_point(runway, far, w, alt)),
        (PatternLeg.DOWNWIND, _pattern_point(runway, runway.length_m / 2.0, w, alt)),
        (PatternLeg.DOWNWIND, _pattern_point(runway, 0.0, w, alt)),
        (PatternLeg.BASE, _pattern_point(runway, -FINAL_LENGTH_M, w, alt)),
        (PatternLeg.FINAL, _pattern_point(runway, -FINAL_LENGTH_M, 0.0, alt)),
        (PatternLeg.FINAL, _pattern_point(runway, 0.0, 0.0, 0.0)),
    ]


def pattern_waypoints(airfield: AirfieldModel, runway: Runway) -> list[LocalPoint]:
    return [pt for _, pt in labeled_pattern_waypoints(airfield, runway)]


def leg_segments(
    airfield: AirfieldModel, runway: Runway
) -> dict[PatternLeg, tuple[LocalPoint, LocalPoint]]:
    """Horizontal segment (start, end) spanned by each leg, in flight order."""
    w = airfield.pattern_width_m
    far = runway.length_m + UPWIND_EXTENSION_M
    pt = lambda s, d: _pattern_point(runway, s, d, 0.0)
    return {
        PatternLeg.UPWIND: (pt(0.0, 0.0), pt(far, 0.0)),
        PatternLeg.CROSSWIND: (pt(far, 0.0), pt(far, w)),
        PatternLeg.DOWNWIND: (pt(far, w), pt(-FINAL_LENGTH_M, w)),
        PatternLeg.BASE: (pt(-FINAL_LENGTH_M, w), pt(-FINAL_LENGTH_M, 0.0)),
        PatternLeg.FINAL: (pt(-FINAL_LENGTH_M, 0.0), pt(0.0, 0.0)),
    }


def _runway_geometry(airfield: AirfieldModel, runway: Runway):
    """Cached (segment coords, headings) per runway; classification hot path."""
    geom = airfield._geom_cache.get(runway.designator)
    if geom is None:
        segments = leg_segments(airfield, runway)
        headings = leg_headings(runway)
        geom = (
            [
                (segments[leg][0].x, segments[leg][0].y,
                 segments[leg][1].x, segments[leg][1].y)
                for leg in LEG_ORDER
            ],
            [headings[leg] for leg in LEG_ORDER],
        )
        airfield._geom_cache[runway.designator] = geom
    return geom


def classify_leg(
    airfield: AirfieldModel,
    runway: Runway,
    position: LocalPoint,
    heading_deg: float,
) -> Optional[PatternLeg]:
    """Which pattern leg corridor (if any) contains an aircraft.

    A corridor is the leg segment widened to 1.5x pattern width with a 45 deg
    heading cone. Overlaps near turns resolve to the nearest leg segment.
    """
    seg_coords, headings = _runway_geometry(airfield, runway)
    max_lateral = CORRIDOR_WIDTH_FACTOR * airfield.pattern_width_m
    best_dist = math.inf
    best_leg: Optional[PatternLeg] = None
    for idx, leg in enumerate(LEG_ORDER):
        if abs(heading_diff_deg(heading_deg, headings[idx])) > CORRIDOR_HEADING_DEG:
            continue
        ax, ay, bx, by = seg_coords[idx]
        dist = point_segment_distance(position.x, position.y, ax, ay, bx, by)
        if dist > max_lateral or dist >= best_dist:
            continue
        best_dist = dist
        best_leg = leg
    return best_leg


#: lateral bound for actually flying a leg, as opposed to merely being inside
#: its (deliberately generous) monitoring corridor
ESTABLISHED_LATERAL_M = 350.0


def established_leg(
    airfield: AirfieldModel,
    runway: Runway,
    position: LocalPoint,
    heading_deg: float,
    lateral_m: float = ESTABLISHED_LATERAL_M,
) -> Optional[PatternLeg]:
    """The leg the aircraft is actually established on, by the tight bound.

    classify_leg answers "whose corridor contains this traffic"; this answers
    "is this aircraft flying that leg", which routing and the turn/descent
    discipline rules need.
    """
    leg = classify_leg(airfield, runway, position, heading_deg)
    if leg is None:
        return None
    seg_coords, _ = _runway_geometry(airfield, runway)
    ax, ay, bx, by = seg_coords[LEG_ORDER.index(leg)]
    dist = point_segment_distance(position.x, position.y, ax, ay, bx, by)
    return leg if dist <= lateral_m else None


def corridor_margin(
    airfield: AirfieldModel, runway: Runway, position: LocalPoint
) -> float:
    """Signed distance to the pattern corridor boundary: positive inside.

    Purely geometric (no heading test); used as a monitor channel.
    """
    seg_coords, _ = _runway_geometry(airfield, runway)
    max_lateral = CORRIDOR_WIDTH_FACTOR * airfield.pattern_width_m
    nearest = min(
        point_segment_distance(position.x, position.y, ax, ay, bx, by)
        for ax, ay, bx, by in seg_coords
    )
    return max_lateral - nearest


def headwind_component_kt(runway: Runway, wind: WindState) -> float:
    if wind.is_calm:
        return 0.0
    return wind.speed_kt * math.cos(math.radians(wind.direction_deg - runway.heading_deg))


def preferred_runway(airfield: AirfieldModel, wind: WindState) -> Runway:
    """Runway with the strongest headwind component; calm or variable wind
    falls back to the airfield's calm-wind runway, ties to the lower number."""
    if not airfield.runways:
        raise ValueError("airfield has no runways")
    if wind.is_calm:
        return airfield.runway(airfield.calm_wind_runway)
    best = airfield.runways[0]
    best_hw = headwind_component_kt(best, wind)
    for rwy in airfield.runways[1:]:
        hw = headwind_component_kt(rwy, wind)
        if hw > best_hw + 1e-9 or (abs(hw - best_hw) <= 1e-9 and rwy.number < best.number):
            best, best_hw = rwy, hw
    return best
