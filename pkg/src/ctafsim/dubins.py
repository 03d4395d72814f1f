"""Shortest Dubins paths between 2-D poses for a fixed minimum turn radius.

Works in math convention internally (x east, y north, theta radians CCW from
+x). `shortest_path` takes compass-heading poses and converts. Segment letters
use the compass sense: L = left turn (heading decreases), which is CCW here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

TWO_PI = 2.0 * math.pi


def _mod2pi(theta: float) -> float:
    return theta % TWO_PI


def heading_to_theta(heading_deg: float) -> float:
    return math.radians(90.0 - heading_deg)


def theta_to_heading(theta: float) -> float:
    return (90.0 - math.degrees(theta)) % 360.0


@dataclass(slots=True)
class DubinsSegment:
    kind: str           # 'L', 'S' or 'R'
    length_m: float
    # geometry at the segment start, math convention
    x: float
    y: float
    theta: float

    def point_at(self, s: float, radius: float) -> tuple[float, float, float]:
        """Pose after arc/straight distance s from the segment start."""
        if self.kind == "S":
            return (self.x + s * math.cos(self.theta),
                    self.y + s * math.sin(self.theta),
                    self.theta)
        sign = 1.0 if self.kind == "L" else -1.0
        dphi = sign * s / radius
        cx = self.x - sign * radius * math.sin(self.theta)
        cy = self.y + sign * radius * math.cos(self.theta)
        theta = self.theta + dphi
        return (cx + sign * radius * math.sin(theta),
                cy - sign * radius * math.cos(theta),
                theta)

    def center(self, radius: float) -> tuple[float, float]:
        if self.kind == "S":
            raise ValueError("straight segment has no center")
        sign = 1.0 if self.kind == "L" else -1.0
        return (self.x - sign * radius * math.sin(self.theta),
                self.y + sign * radius * math.cos(self.theta))


@dataclass(slots=True)
class DubinsPath:
    word: str
    segments: list[DubinsSegment]
    radius_m: float

    @property
    def length_m(self) -> float:
        return sum(seg.length_m for seg in self.segments)

    def sample(self, s: float) -> tuple[float, float, float]:
        """Pose (x, y, theta) at arc length s along the path (clamped)."""
        s = max(0.0, min(s, self.length_m))
        for seg in self.segments:
            if s <= seg.length_m or seg is self.segments[-1]:
                return seg.point_at(s, self.radius_m)
            s -= seg.length_m
        return self.segments[-1].point_at(self.segments[-1].length_m, self.radius_m)

    def sample_many(self, step_m: float) -> Iterator[tuple[float, float, float]]:
        n = max(1, int(math.ceil(self.length_m / step_m)))
        for i in range(n + 1):
            yield self.sample(self.length_m * i / n)

    def distance_to(self, px: float, py: float) -> float:
        """Horizontal distance from a point to the path (analytic per segment)."""
        best = math.inf
        r = self.radius_m
        for seg in self.segments:
            if seg.length_m <= 1e-9:
                d = math.hypot(px - seg.x, py - seg.y)
            elif seg.kind == "S":
                ex, ey, _ = seg.point_at(seg.length_m, r)
                d = _point_segment(px, py, seg.x, seg.y, ex, ey)
            else:
                d = _point_arc(px, py, seg, r)
            if d < best:
                best = d
        return best


def _point_segment(px, py, ax, ay, bx, by) -> float:
    abx, aby = bx - ax, by - ay
    denom = abx * abx + aby * aby
    if denom <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * abx + (py - ay) * aby) / denom))
    return math.hypot(px - ax - t * abx, py - ay - t * aby)


def _point_arc(px, py, seg: DubinsSegment, radius: float) -> float:
    sign = 1.0 if seg.kind == "L" else -1.0
    cx, cy = seg.center(radius)
    span = seg.length_m / radius
    # polar angle of the arc start and of the query point around the center
    start_ang = math.atan2(seg.y - cy, seg.x - cx)
    pt_ang = math.atan2(py - cy, px - cx)
    swept = _mod2pi(sign * (pt_ang - start_ang))
    if swept <= span:
        return abs(math.hypot(px - cx, py - cy) - radius)
    ex, ey, _ = seg.point_at(seg.length_m, radius)
    return min(math.hypot(px - seg.x, py - seg.y), math.hypot(px - ex, py - ey))


def _clamp_sq(p_sq: float) -> Optional[float]:
    if p_sq < -1e-9:
        return None
    return max(p_sq, 0.0)


def _atan2s(y: float, x: float) -> float:
    """atan2 with the degenerate origin pinned to 0 (tangent-arc cases)."""
    if abs(y) < 1e-12 and abs(x) < 1e-12:
        return 0.0
    return math.atan2(y, x)


def _lsl(alpha, beta, d):
    sa, sb = math.sin(alpha), math.sin(beta)
    p_sq = _clamp_sq(2.0 + d * d - 2.0 * math.cos(alpha - beta) + 2.0 * d * (sa - sb))
    if p_sq is None:
        return None
    tmp = _atan2s(math.cos(beta) - math.cos(alpha), d + sa - sb)
    return (_mod2pi(tmp - alpha), math.sqrt(p_sq), _mod2pi(beta - tmp))


def _rsr(alpha, beta, d):
    sa, sb = math.sin(alpha), math.sin(beta)
    p_sq = _clamp_sq(2.0 + d * d - 2.0 * math.cos(alpha - beta) + 2.0 * d * (sb - sa))
    if p_sq is None:
        return None
    tmp = _atan2s(math.cos(alpha) - math.cos(beta), d - sa + sb)
    return (_mod2pi(alpha - tmp), math.sqrt(p_sq), _mod2pi(tmp - beta))


def _lsr(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    p_sq = _clamp_sq(-2.0 + d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (sa + sb))
    if p_sq is None:
        return None
    p = math.sqrt(p_sq)
    tmp = _atan2s(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
    return (_mod2pi(tmp - alpha), p, _mod2pi(tmp - beta))


def _rsl(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    p_sq = _clamp_sq(d * d - 2.0 + 2.0 * math.cos(alpha - beta) - 2.0 * d * (sa + sb))
    if p_sq is None:
        return None
    p = math.sqrt(p_sq)
    tmp = _atan2s(ca + cb, d - sa - sb) - math.atan2(2.0, p)
    return (_mod2pi(alpha - tmp), p, _mod2pi(beta - tmp))


def _rlr(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    tmp = (6.0 - d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (sa - sb)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(TWO_PI - math.acos(tmp))
    t = _mod2pi(alpha - math.atan2(ca - cb, d - sa + sb) + p / 2.0)
    return (t, p, _mod2pi(alpha - beta - t + p))


def _lrl(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    tmp = (6.0 - d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (sb - sa)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(TWO_PI - math.acos(tmp))
    t = _mod2pi(-alpha + math.atan2(cb - ca, d + sa - sb) + p / 2.0)
    return (t, p, _mod2pi(beta - alpha - t + p))


_WORDS = [
    ("LSL", _lsl),
    ("RSR", _rsr),
    ("LSR", _lsr),
    ("RSL", _rsl),
    ("RLR", _rlr),
    ("LRL", _lrl),
]


_EPS_LEN = 1e-9


def _snap(value: float) -> float:
    """Segment parameters within rounding of a full turn collapse to zero."""
    if value > TWO_PI - _EPS_LEN:
        return 0.0
    return value


def _endpoint_ok(word: str, lengths, alpha: float, beta: float, d: float) -> bool:
    """Propagate the normalized word and confirm it lands on (d, 0, beta)."""
    x, y, th = 0.0, 0.0, alpha
    for kind, ln in zip(word, lengths):
        if kind == "S":
            x += ln * math.cos(th)
            y += ln * math.sin(th)
        else:
            sign = 1.0 if kind == "L" else -1.0
            cx = x - sign * math.sin(th)
            cy = y + sign * math.cos(th)
            th += sign * ln
            x = cx + sign * math.sin(th)
            y = cy - sign * math.cos(th)
    tol = 1e-6 * (1.0 + d)
    return (
        abs(x - d) < tol
        and abs(y) < tol
        and abs(_mod2pi(th - beta + math.pi) - math.pi) < 1e-6
    )


def _solve(x0, y0, th0, x1, y1, th1, radius):
    dx, dy = x1 - x0, y1 - y0
    big_d = math.hypot(dx, dy)
    d = big_d / radius
    phi = math.atan2(dy, dx) if big_d > 1e-12 else 0.0
    alpha = _mod2pi(th0 - phi)
    beta = _mod2pi(th1 - phi)
    feasible = []
    for word, fn in _WORDS:
        res = fn(alpha, beta, d)
        if res is None:
            continue
        # arc parameters live in [0, 2pi); straight lengths are unbounded
        res = tuple(
            _snap(v) if kind != "S" else v for kind, v in zip(word, res)
        )
        feasible.append((sum(res), word, res))
    # verify endpoints best-first; degenerate tangent cases can emit garbage
    feasible.sort(key=lambda item: item[0])
    for total, word, res in feasible:
        if _endpoint_ok(word, res, alpha, beta, d):
            return total, word, res
    raise ValueError("no Dubins word found (degenerate configuration)")


def shortest_path(
    start_xy_heading: tuple[float, float, float],
    goal_xy_heading: tuple[float, float, float],
    turn_radius_m: float,
) -> DubinsPath:
    """Shortest Dubins path between two (x, y, compass-heading-deg) poses."""
    if turn_radius_m <= 0:
        raise ValueError("turn radius must be positive")
    x0, y0, h0 = start_xy_heading
    x1, y1, h1 = goal_xy_heading
    for v in (x0, y0, h0, x1, y1, h1):
        if not math.isfinite(v):
            raise ValueError("non-finite Dubins input")
    th0, th1 = heading_to_theta(h0), heading_to_theta(h1)
    if (math.hypot(x1 - x0, y1 - y0) < 1e-9
            and abs(_mod2pi(th0 - th1 + math.pi) - math.pi) < 1e-9):
        return DubinsPath("S", [DubinsSegment("S", 0.0, x0, y0, th0)], turn_radius_m)
    _, word, (t, p, q) = _solve(x0, y0, th0, x1, y1, th1, turn_radius_m)

    segments: list[DubinsSegment] = []
    pose = (x0, y0, th0)
    # all three word parameters are normalized by the turn radius
    for kind, norm_len in zip(word, (t, p, q)):
        length = norm_len * turn_radius_m
        seg = DubinsSegment(kind, length, *pose)
        segments.append(seg)
        pose = seg.point_at(length, turn_radius_m)
    return DubinsPath(word, segments, turn_radius_m)
