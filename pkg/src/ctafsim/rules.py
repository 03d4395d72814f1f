"""Flight-rule encoding for pattern operations, as STL over monitor channels.

The monitor stays generic: geometry is folded into per-sample channels here,
and the formula itself is plain predicate comparisons. Channels:

    sep        effective separation to the nearest intruder: the horizontal
               distance when vertically unseparated, otherwise credited with
               the vertical surplus so it scores above the floor
    alt        ego altitude AGL
    in_pattern signed distance to the pattern corridor boundary (positive in)
    turn_ok    +/-1: turning against the pattern side while in the corridor
    descent_ok +/-1: descending anywhere in the pattern except final
    row_ok     +/-1: on final inside d_final while a converging intruder is
               established on the same final

The conjunction of five always-clauses covers separation, pattern altitude,
turn direction, descent discipline, and final-approach right of way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import stl
from .dynamics import AircraftState, ControlLimits, DEFAULT_LIMITS
from .geo import (
    AirfieldModel,
    LocalPoint,
    PatternLeg,
    Runway,
    Side,
    classify_leg,
    corridor_margin,
    established_leg,
    leg_headings,
)

_SINK_THRESHOLD_MPS = -0.5
_CLOSING_THRESHOLD_MPS = 0.5
_NO_INTRUDER_SEP_M = 1.0e6

# below this height the aircraft is landing (or low-approaching) over the
# runway; descent discipline no longer applies
_LANDING_EXEMPT_ALT_M = 50.0

# a wrong-way "turn" means: recently established on a leg, now pointing the
# wrong side of its course by more than one corrective primitive can explain;
# S-turn intercepts stay legal, rolling out of the pattern does not
_TURN_WINDOW_S = 10.0
_TURN_DEVIATION_DEG = 35.0

# discipline rules apply only while actually flying a leg: tight lateral
# bound plus course alignment, so crossing traffic is not "on final"
_DISCIPLINE_CONE_DEG = 25.0


@dataclass(slots=True)
class RuleConfig:
    d_min_m: float = 300.0       # horizontal separation floor
    h_min_m: float = 100.0       # vertical relief
    alt_band_m: float = 60.0     # allowed excess over pattern altitude
    d_final_m: float = 2000.0    # right-of-way protection radius on final
    horizon_s: float = 600.0     # always-clause bound; clips to trace length


def effective_separation_m(
    horizontal_m: float, dz_m: float, config: RuleConfig
) -> float:
    """Separation metric with vertical relief: below h_min of vertical spacing
    it is the raw horizontal distance; above, it can never score as a breach."""
    if abs(dz_m) < config.h_min_m:
        return horizontal_m
    return max(horizontal_m, config.d_min_m + abs(dz_m) - config.h_min_m)


def pattern_rules(
    airfield: AirfieldModel, runway: Runway, config: Optional[RuleConfig] = None
) -> stl.Formula:
    """The rule conjunction monitored on every plan and executed trajectory."""
    cfg = config or RuleConfig()
    h = cfg.horizon_s
    alt_cap = airfield.pattern_altitude_m + cfg.alt_band_m
    return stl.conj(
        stl.Globally(0, h, stl.Pred("sep", ">=", cfg.d_min_m)),
        stl.Globally(0, h, stl.disj(
            stl.Pred("in_pattern", "<=", 0.0),
            stl.Pred("alt", "<=", alt_cap),
        )),
        stl.Globally(0, h, stl.Pred("turn_ok", ">=", 0.0)),
        stl.Globally(0, h, stl.Pred("descent_ok", ">=", 0.0)),
        stl.Globally(0, h, stl.Pred("row_ok", ">=", 0.0)),
    )


def instantaneous_rules(
    airfield: AirfieldModel, runway: Runway, config: Optional[RuleConfig] = None
) -> stl.Formula:
    """Same conjunction without the temporal closure, for per-step margins."""
    cfg = config or RuleConfig()
    alt_cap = airfield.pattern_altitude_m + cfg.alt_band_m
    return stl.conj(
        stl.Pred("sep", ">=", cfg.d_min_m),
        stl.disj(stl.Pred("in_pattern", "<=", 0.0), stl.Pred("alt", "<=", alt_cap)),
        stl.Pred("turn_ok", ">=", 0.0),
        stl.Pred("descent_ok", ">=", 0.0),
        stl.Pred("row_ok", ">=", 0.0),
    )


def _signed_heading_change(from_deg: float, to_deg: float) -> float:
    """Course change in degrees, positive rightward (clockwise)."""
    return (to_deg - from_deg + 180.0) % 360.0 - 180.0


def _headings_from_path(path: Sequence[LocalPoint]) -> list[float]:
    """Track headings estimated from successive positions (repeats at the end)."""
    n = len(path)
    if n == 1:
        return [0.0]
    out = []
    for k in range(n - 1):
        a, b = path[k], path[k + 1]
        if a.horizontal_to(b) < 1e-6:
            out.append(out[-1] if out else 0.0)
        else:
            out.append(math.degrees(math.atan2(b.x - a.x, b.y - a.y)) % 360.0)
    out.append(out[-1])
    return out


def build_rule_trace(
    ego: Sequence[AircraftState],
    intruders: Sequence[Sequence[LocalPoint]],
    airfield: AirfieldModel,
    runway: Runway,
    stride_s: float,
    config: Optional[RuleConfig] = None,
    extra_channels: Optional[dict[str, list[float]]] = None,
    limits: Optional[ControlLimits] = None,
) -> stl.Trace:
    """Sample the rule channels along an ego trajectory.

    Intruder paths must be aligned with the ego samples (same stride and
    count); FINISHED or absent agents are simply not passed.
    """
    cfg = config or RuleConfig()
    lim = limits or DEFAULT_LIMITS
    n = len(ego)
    for path in intruders:
        if len(path) != n:
            raise ValueError("intruder path not aligned with ego samples")

    # rightward deviation is positive; left-pattern traffic must not swing
    # right of a leg it was just flying (mirrored for right patterns)
    turn_sign = 1.0 if runway.pattern_side is Side.LEFT else -1.0
    window = max(1, round(_TURN_WINDOW_S / stride_s))
    threshold = runway.threshold
    intruder_headings = [_headings_from_path(path) for path in intruders]
    leg_courses = leg_headings(runway)

    def discipline_leg(state: AircraftState) -> Optional[PatternLeg]:
        leg = established_leg(airfield, runway, state.position, state.heading_deg)
        if leg is None:
            return None
        off = abs((state.heading_deg - leg_courses[leg] + 180.0) % 360.0 - 180.0)
        return leg if off <= _DISCIPLINE_CONE_DEG else None

    disc = [discipline_leg(s) for s in ego]

    sep: list[float] = []
    alt: list[float] = []
    in_pattern: list[float] = []
    turn_ok: list[float] = []
    descent_ok: list[float] = []
    row_ok: list[float] = []

    for k in range(n):
        state = ego[k]
        pos = state.position
        margin = corridor_margin(airfield, runway, pos)
        leg = established_leg(airfield, runway, pos, state.heading_deg)
        in_pattern.append(margin)
        alt.append(pos.z)

        worst_sep = _NO_INTRUDER_SEP_M
        row = 1.0
        on_final_close = (
            leg is PatternLeg.FINAL
            and pos.horizontal_to(threshold) <= cfg.d_final_m
        )
        for i, path in enumerate(intruders):
            other = path[k]
            horiz = pos.horizontal_to(other)
            worst_sep = min(
                worst_sep, effective_separation_m(horiz, other.z - pos.z, cfg)
            )
            if on_final_close and row > 0:
                other_leg = classify_leg(
                    airfield, runway, other, intruder_headings[i][k]
                )
                if other_leg is PatternLeg.FINAL and _closing_rate(
                    ego, path, k, stride_s
                ) > _CLOSING_THRESHOLD_MPS:
                    row = -1.0
        sep.append(worst_sep)
        row_ok.append(row)

        # turn discipline: look back over the window for a leg we were
        # established on, and flag a present course that deviates wrong-way
        # from it beyond a single correction
        wrong_way = False
        for j in range(max(0, k - window), k + 1):
            past_leg = disc[j]
            if past_leg is None:
                continue
            deviation = turn_sign * _signed_heading_change(
                leg_courses[past_leg], state.heading_deg
            )
            if deviation > _TURN_DEVIATION_DEG:
                wrong_way = True
                break
        turn_ok.append(-1.0 if wrong_way else 1.0)
        descending = (
            state.vertical_rate_mps < _SINK_THRESHOLD_MPS
            and pos.z >= _LANDING_EXEMPT_ALT_M
        )
        off_final = disc[k] is not None and disc[k] is not PatternLeg.FINAL
        descent_ok.append(-1.0 if (descending and off_final) else 1.0)

    alt_cap = airfield.pattern_altitude_m + cfg.alt_band_m
    rule_margin = [
        min(
            sep[k] - cfg.d_min_m,
            max(-in_pattern[k], alt_cap - alt[k]),
            turn_ok[k],
            descent_ok[k],
            row_ok[k],
        )
        for k in range(n)
    ]
    channels = {
        "sep": sep,
        "alt": alt,
        "in_pattern": in_pattern,
        "turn_ok": turn_ok,
        "descent_ok": descent_ok,
        "row_ok": row_ok,
        "rule_margin": rule_margin,
    }
    if extra_channels:
        channels.update(extra_channels)
    return stl.Trace(stride_s=stride_s, channels=channels)


def _closing_rate(
    ego: Sequence[AircraftState],
    path: Sequence[LocalPoint],
    k: int,
    stride_s: float,
) -> float:
    """Range rate toward the intruder, positive when closing."""
    n = len(ego)
    if n < 2:
        return 0.0
    j = k if k + 1 < n else k - 1
    r0 = ego[j].position.horizontal_to(path[j])
    r1 = ego[j + 1].position.horizontal_to(path[j + 1])
    return (r0 - r1) / stride_s


def step_margins(
    trace: stl.Trace,
    airfield: AirfieldModel,
    runway: Runway,
    config: Optional[RuleConfig] = None,
) -> list[float]:
    """Per-sample rule margin (min over the five clauses); the min of this list
    equals the robustness of pattern_rules at the trace start."""
    formula = instantaneous_rules(airfield, runway, config)
    return [stl.robustness(formula, trace, k) for k in range(len(trace))]
