"""Last-line separation filter, independent of the planner's inference.

Intruders are extrapolated on straight lines from their last observed state
(never from intent forecasts), the plan's own path is checked against them
with closed-form closest-point-of-approach refinement between samples, and a
violating plan is repaired by the cheapest primitive substitution that
restores the separation cylinder. The candidate order is total and
deterministic; the search budget is counted in candidates rather than
wall-clock so repeated runs stay bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .dynamics import (
    AircraftState,
    ControlLimits,
    DEFAULT_LIMITS,
    MotionPrimitive,
    PRIMITIVE_DURATION_S,
    Turn,
    default_primitive_set,
)
from .geo import LocalPoint, Side
from .intent import AgentBelief

NO_INTRUDER_DISTANCE_M = math.inf


@dataclass(slots=True)
class SafetyConfig:
    d_safe_m: float = 300.0
    h_safe_m: float = 100.0
    horizon_s: float = 60.0
    stride_s: float = 1.0
    turn_swap_cost: float = 1.0
    vertical_swap_cost: float = 1.0
    speed_swap_cost: float = 0.5
    earliness_factor: float = 2.0   # each step earlier doubles the cost
    # repairs aim above the verification floor, so executing a few seconds of
    # the repaired plan before the next filter pass cannot graze the floor
    repair_margin_m: float = 40.0
    # deterministic stand-in for a wall-clock cap; the default covers every
    # single and double substitution of a 12-step plan so the search is
    # complete, at the price of the worst case running past the soft target
    candidate_budget: int = 7000
    risky_run_length: int = 3       # consecutive against-pattern turns rejected


@dataclass(slots=True)
class SeparationReport:
    min_distance_m: float
    time_of_min_s: float
    violating_agent: Optional[str]
    safe: bool


def extrapolate_linear(
    state: AircraftState, horizon_s: float, stride_s: float
) -> list[tuple[float, LocalPoint]]:
    """Constant-velocity samples including t=0, altitude clamped at ground."""
    steps = horizon_s / stride_s
    if stride_s <= 0 or abs(steps - round(steps)) > 1e-9:
        raise ValueError(f"stride {stride_s} does not divide horizon {horizon_s}")
    vx = state.speed_mps * math.sin(math.radians(state.heading_deg))
    vy = state.speed_mps * math.cos(math.radians(state.heading_deg))
    out = []
    for k in range(int(round(steps)) + 1):
        t = k * stride_s
        out.append((
            state.time_s + t,
            LocalPoint(
                state.position.x + vx * t,
                state.position.y + vy * t,
                max(0.0, state.position.z + state.vertical_rate_mps * t),
            ),
        ))
    return out


def _segment_cpa(
    ex0: LocalPoint, ex1: LocalPoint, ix0: LocalPoint, ix1: LocalPoint,
    stride_s: float, h_safe_m: float,
) -> Optional[tuple[float, float]]:
    """Closest vertically-unseparated approach on one linear segment pair.

    Returns (horizontal distance, offset seconds within the segment), or None
    if vertical separation holds through the whole segment. Candidates are
    the segment ends, the unconstrained horizontal CPA, and the moments the
    vertical gap crosses the relief threshold (the binding minimum can sit on
    that boundary).
    """
    px = ix0.x - ex0.x
    py = ix0.y - ex0.y
    vx = ((ix1.x - ix0.x) - (ex1.x - ex0.x)) / stride_s
    vy = ((ix1.y - ix0.y) - (ex1.y - ex0.y)) / stride_s
    v2 = vx * vx + vy * vy
    t_star = 0.0 if v2 <= 1e-12 else max(0.0, min(stride_s, -(px * vx + py * vy) / v2))

    dz0 = ix0.z - ex0.z
    dz1 = ix1.z - ex1.z
    candidates = [0.0, stride_s, t_star]
    dz_rate = (dz1 - dz0) / stride_s
    if abs(dz_rate) > 1e-12:
        for boundary in (h_safe_m, -h_safe_m):
            t_cross = (boundary - dz0) / dz_rate
            if 0.0 <= t_cross <= stride_s:
                # nudge inside the unseparated side of the boundary
                candidates.append(min(stride_s, max(0.0, t_cross)))

    best: Optional[tuple[float, float]] = None
    for t in candidates:
        frac = t / stride_s
        dz = dz0 + (dz1 - dz0) * frac
        if abs(dz) >= h_safe_m + 1e-9:
            continue
        d = math.hypot(px + vx * t, py + vy * t)
        if best is None or d < best[0]:
            best = (d, t)
    return best


def min_projected_distance(
    ego_path: Sequence[tuple[float, LocalPoint]],
    intruders: dict[str, Sequence[tuple[float, LocalPoint]]],
    config: Optional[SafetyConfig] = None,
) -> SeparationReport:
    """Worst separation between the ego path and each intruder path.

    Paths must share stride and start time. The reported distance is the
    minimum horizontal distance over the moments when vertical separation is
    below h_safe; if no such moment exists the encounter is vertically safe.
    """
    cfg = config or SafetyConfig()
    if not intruders:
        return SeparationReport(NO_INTRUDER_DISTANCE_M, 0.0, None, True)

    best_d = NO_INTRUDER_DISTANCE_M
    best_t = ego_path[0][0]
    best_agent: Optional[str] = None
    for agent_id, path in intruders.items():
        n = min(len(ego_path), len(path))
        for k in range(n - 1):
            t0, e0 = ego_path[k]
            _, e1 = ego_path[k + 1]
            _, i0 = path[k]
            _, i1 = path[k + 1]
            hit = _segment_cpa(e0, e1, i0, i1, cfg.stride_s, cfg.h_safe_m)
            if hit is not None and hit[0] < best_d:
                best_d = hit[0]
                best_t = t0 + hit[1]
                best_agent = agent_id
        if n == 1:
            _, e0 = ego_path[0]
            _, i0 = path[0]
            if abs(i0.z - e0.z) < cfg.h_safe_m:
                d = e0.horizontal_to(i0)
                if d < best_d:
                    best_d, best_t, best_agent = d, ego_path[0][0], agent_id

    safe = best_d >= cfg.d_safe_m
    return SeparationReport(best_d, best_t, None if safe else best_agent, safe)


# ---------------------------------------------------------------------------
# plan repair


def _swap_cost(a: MotionPrimitive, b: MotionPrimitive, cfg: SafetyConfig) -> float:
    cost = 0.0
    if a.turn is not b.turn:
        cost += cfg.turn_swap_cost
    if a.vertical is not b.vertical:
        cost += cfg.vertical_swap_cost
    if a.speed_cmd is not b.speed_cmd:
        cost += cfg.speed_swap_cost
    return cost


def _position_factor(step_index: int, plan_len: int, cfg: SafetyConfig) -> float:
    return cfg.earliness_factor ** (plan_len - 1 - step_index)


def _is_risky(
    primitives: Sequence[MotionPrimitive],
    pattern_side: Optional[Side],
    cfg: SafetyConfig,
) -> bool:
    """Reject sustained turns against the pattern side (a proxy for maneuvers
    that other pattern traffic will not expect)."""
    if pattern_side is None:
        return False
    against = Turn.RIGHT if pattern_side is Side.LEFT else Turn.LEFT
    run = 0
    for prim in primitives:
        run = run + 1 if prim.turn is against else 0
        if run >= cfg.risky_run_length:
            return True
    return False


def check_plan(
    plan, beliefs: Sequence[AgentBelief], config: Optional[SafetyConfig] = None
) -> SeparationReport:
    """Separation report for a plan against linearly extrapolated intruders."""
    cfg = config or SafetyConfig()
    ego_path = [(s.time_s, s.position) for s in plan.states_1s]
    horizon = (len(ego_path) - 1) * cfg.stride_s
    intruder_paths = {
        b.agent_id: extrapolate_linear(b.last_state, horizon, cfg.stride_s)
        for b in beliefs
    }
    return min_projected_distance(ego_path, intruder_paths, cfg)


def filter_plan(
    plan,
    beliefs: Sequence[AgentBelief],
    config: Optional[SafetyConfig] = None,
    limits: ControlLimits = DEFAULT_LIMITS,
    pattern_side: Optional[Side] = None,
    rebuild=None,
):
    """Verify a plan and, if it violates the separation cylinder, apply the
    cheapest primitive substitution that restores it.

    `rebuild(sequence) -> Plan` re-simulates a primitive id sequence; the
    planner provides it so filtered plans stay executable by the same
    follower. Returns (plan, modified).
    """
    cfg = config or SafetyConfig()
    report = check_plan(plan, beliefs, cfg)
    if report.safe:
        return plan, False
    if rebuild is None:
        raise ValueError("unsafe plan and no rebuild callback provided")

    horizon = (len(plan.states_1s) - 1) * cfg.stride_s
    intruder_paths = {
        b.agent_id: extrapolate_linear(b.last_state, horizon, cfg.stride_s)
        for b in beliefs
    }
    resimulate = plan.resimulate

    def evaluate(seq):
        if resimulate is not None:
            states = resimulate(seq)
        else:
            states = rebuild(seq).states_1s
        ego_path = [(s.time_s, s.position) for s in states]
        return min_projected_distance(ego_path, intruder_paths, cfg)

    alphabet = default_primitive_set(limits)
    base = list(plan.primitives)
    n = len(base)

    # all single substitutions in increasing deviation cost, then all doubles
    singles: list[tuple[float, int, tuple[tuple[int, int], ...]]] = []
    serial = 0
    for i in range(n):
        for prim in alphabet:
            if prim.id == base[i]:
                continue
            cost = _swap_cost(alphabet[base[i]], prim, cfg) * _position_factor(i, n, cfg)
            singles.append((cost, serial, ((i, prim.id),)))
            serial += 1
    doubles: list[tuple[float, int, tuple[tuple[int, int], ...]]] = []
    for i in range(n):
        for j in range(i + 1, n):
            for pi in alphabet:
                if pi.id == base[i]:
                    continue
                ci = _swap_cost(alphabet[base[i]], pi, cfg) * _position_factor(i, n, cfg)
                for pj in alphabet:
                    if pj.id == base[j]:
                        continue
                    cj = _swap_cost(alphabet[base[j]], pj, cfg) * _position_factor(j, n, cfg)
                    doubles.append((ci + cj, serial, ((i, pi.id), (j, pj.id))))
                    serial += 1
    singles.sort(key=lambda c: (c[0], c[1]))
    doubles.sort(key=lambda c: (c[0], c[1]))
    candidates = [(cost, len(subs), serial, subs)
                  for cost, serial, subs in singles + doubles]

    # substitutions that only touch the plan after the first violation leave
    # the breaching prefix untouched; skip them without simulating
    plan_start = plan.states_1s[0].time_s
    latest_useful = max(
        0, int((report.time_of_min_s - plan_start) // PRIMITIVE_DURATION_S)
    )
    repair_floor = cfg.d_safe_m + cfg.repair_margin_m

    best_seq = None
    best_report = report
    evaluated = 0
    for cost, _, _, subs in candidates:
        if evaluated >= cfg.candidate_budget:
            break
        if min(idx for idx, _ in subs) > latest_useful:
            continue
        seq = list(base)
        for idx, pid in subs:
            seq[idx] = pid
        if _is_risky([alphabet[p] for p in seq], pattern_side, cfg):
            continue
        evaluated += 1
        cand_report = evaluate(seq)
        if cand_report.min_distance_m >= repair_floor:
            winner = rebuild(seq)
            winner.safety_modified = True
            winner.most_likely_branch = plan.most_likely_branch
            return winner, True
        if cand_report.min_distance_m > best_report.min_distance_m:
            best_seq, best_report = seq, cand_report

    if best_seq is not None:
        # best-effort: above the floor counts as safe even if under the
        # repair margin; below the floor ships flagged
        winner = rebuild(best_seq)
        winner.degraded = not best_report.safe
        winner.safety_modified = True
        winner.most_likely_branch = plan.most_likely_branch
        return winner, True
    plan.degraded = True
    return plan, False
