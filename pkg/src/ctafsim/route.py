"""Route construction: the remaining pattern waypoints that realize a pilot
intent from wherever the aircraft currently is."""

from __future__ import annotations

import math
from typing import Optional

from .geo import (
    AirfieldModel,
    LEG_ORDER,
    LocalPoint,
    PatternLeg,
    Runway,
    bearing_unit,
    established_leg,
    labeled_pattern_waypoints,
    leg_headings,
    UPWIND_EXTENSION_M,
)
from .radio import IntentKind

LOW_APPROACH_ALT_M = 15.0
_PASSED_MARGIN_M = 50.0


def _leg_progress(runway: Runway, leg_heading: float, point: LocalPoint) -> float:
    """Along-leg coordinate of a point (meters along the leg's direction)."""
    ux, uy = bearing_unit(leg_heading)
    return point.x * ux + point.y * uy


def remaining_waypoints(
    airfield: AirfieldModel,
    runway: Runway,
    position: LocalPoint,
    heading_deg: float,
) -> list[tuple[PatternLeg, LocalPoint]]:
    """Waypoints still ahead on this runway's circuit. Aircraft outside the
    pattern are routed to the downwind entry; aircraft inside continue from
    their current leg, skipping waypoints already passed."""
    labeled = labeled_pattern_waypoints(airfield, runway)
    leg = established_leg(airfield, runway, position, heading_deg)
    if leg is None:
        entry = next(i for i, (l, _) in enumerate(labeled) if l is PatternLeg.DOWNWIND)
        return labeled[entry:]
    headings = leg_headings(runway)
    order = {l: i for i, l in enumerate(LEG_ORDER)}
    here = order[leg]
    out: list[tuple[PatternLeg, LocalPoint]] = []
    my_progress = _leg_progress(runway, headings[leg], position)
    for wp_leg, pt in labeled:
        if order[wp_leg] < here:
            continue
        if wp_leg is leg:
            if _leg_progress(runway, headings[leg], pt) <= my_progress + _PASSED_MARGIN_M:
                continue
        out.append((wp_leg, pt))
    if not out:
        out = [labeled[-1]]
    return out


def goal_route(
    airfield: AirfieldModel,
    runway: Runway,
    position: LocalPoint,
    heading_deg: float,
    goal_kind: IntentKind,
) -> tuple[list[LocalPoint], bool]:
    """Waypoint route (points, loops) realizing a goal on a runway."""
    remaining = [pt for _, pt in remaining_waypoints(airfield, runway, position, heading_deg)]
    if goal_kind in (IntentKind.LANDING, IntentKind.CHANGE_RUNWAY, IntentKind.NONE):
        return remaining, False
    if goal_kind is IntentKind.LOW_APPROACH:
        route = list(remaining)
        over = route[-1]
        route[-1] = LocalPoint(over.x, over.y, LOW_APPROACH_ALT_M)
        ux, uy = bearing_unit(runway.heading_deg)
        climb_out = runway.length_m + UPWIND_EXTENSION_M
        route.append(LocalPoint(
            over.x + ux * climb_out, over.y + uy * climb_out,
            airfield.pattern_altitude_m,
        ))
        return route, False
    if goal_kind is IntentKind.REMAIN_IN_PATTERN:
        # circuits cross the threshold at low-approach height, not touchdown
        def over(pt: LocalPoint) -> LocalPoint:
            return LocalPoint(pt.x, pt.y, max(pt.z, LOW_APPROACH_ALT_M))

        loop_pts = [over(pt) for _, pt in labeled_pattern_waypoints(airfield, runway)]
        return [over(pt) for pt in remaining] + loop_pts, True
    if goal_kind is IntentKind.TAKEOFF:
        ux, uy = bearing_unit(runway.heading_deg)
        t = runway.threshold
        out = []
        for dist, frac in ((runway.length_m, 0.2), (runway.length_m + UPWIND_EXTENSION_M, 1.0),
                           (runway.length_m + UPWIND_EXTENSION_M + 4000.0, 1.0)):
            out.append(LocalPoint(
                t.x + ux * dist, t.y + uy * dist, airfield.pattern_altitude_m * frac
            ))
        return out, False
    raise ValueError(f"no route for goal kind {goal_kind}")


def route_length_m(position: LocalPoint, waypoints: list[LocalPoint], index: int = 0) -> float:
    """Distance to go: to the active waypoint plus the remaining chain."""
    if index >= len(waypoints):
        return 0.0
    total = position.horizontal_to(waypoints[index])
    for i in range(index, len(waypoints) - 1):
        total += waypoints[i].horizontal_to(waypoints[i + 1])
    return total


def time_to_fly_s(length_m: float, speed_mps: float) -> float:
    return length_m / max(speed_mps, 1.0)
