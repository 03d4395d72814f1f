"""Monte Carlo tree search over motion primitives with rule-penalized rollouts.

Plain UCT: select by upper confidence bound, expand one untried primitive,
roll out with the waypoint-following social policy, back up the discounted
return. Rule compliance enters as a penalty on per-step rewards computed from
the same STL channels the monitor uses, so rollouts that breach separation or
pattern discipline score poorly. Other aircraft move along their forecasts
during rollouts; uncertainty is absorbed by replanning, not stochasticity.

Everything is deterministic for a fixed seed: ties break on the lowest
primitive id and per-iteration RNG streams derive from seed and iteration
index, so parallel and serial schedules would produce identical statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from . import intent as intent_mod
from . import route as route_mod
from . import rules, stl
from .dynamics import (
    AircraftState,
    ControlLimits,
    DEFAULT_LIMITS,
    MotionPrimitive,
    NEUTRAL_PRIMITIVE,
    PRIMITIVE_DURATION_S,
    apply_primitive,
    default_primitive_set,
    landed,
    passed_abeam,
    select_primitive,
    step,
)
from .geo import AirfieldModel, LocalPoint, Runway, WindState, preferred_runway
from .intent import AgentBelief, TrajectoryForecast
from .radio import IntentKind, PilotIntent


@dataclass(slots=True)
class PlannerConfig:
    iterations: int = 2000
    max_depth: int = 12
    uct_c: float = 1.414
    discount: float = 0.95
    stl_penalty_weight: float = 10.0
    progress_weight: float = 1.0
    social_weight: float = 0.5
    rng_seed: int = 0

    def validate(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must be in (0, 1]")
        if self.stl_penalty_weight < 0:
            raise ValueError("stl_penalty_weight must be >= 0")


REWARD_STEP_MIN = -100.0
REWARD_STEP_MAX = 1.0
DEVIATION_SCALE_M = 250.0


def uct_score(
    parent_visits: int, child_visits: int, child_mean_value: float, c: float
) -> float:
    """Upper confidence bound for tree policies; unvisited children sort first."""
    if child_visits == 0:
        return math.inf
    return child_mean_value + c * math.sqrt(math.log(max(parent_visits, 1)) / child_visits)


class MctsNode:
    """One searched world state: ego aircraft plus route progress.

    Untried actions are expanded in policy-first order (the rollout policy's
    pick, then ascending id), so on flat value landscapes the visit lead goes
    to the action the policy would fly rather than to exploration noise; the
    order is resolved lazily on first expansion.
    """

    __slots__ = ("state", "wp_index", "terminal", "depth", "action_from_parent",
                 "visits", "total_value", "children", "untried", "preferred")

    def __init__(self, state, wp_index, terminal, depth, action_from_parent):
        self.state = state
        self.wp_index = wp_index
        self.terminal = terminal
        self.depth = depth
        self.action_from_parent: Optional[int] = action_from_parent
        self.visits = 0
        self.total_value = 0.0
        self.children: dict[int, MctsNode] = {}
        self.untried: Optional[list[int]] = [] if terminal else None
        self.preferred: Optional[int] = None

    def expandable(self) -> bool:
        return not self.terminal and (self.untried is None or bool(self.untried))

    def untried_actions(self, problem: "_FlightProblem") -> list[int]:
        if self.untried is None:
            self.preferred = problem.policy_action(self.state, self.wp_index)
            self.untried = [self.preferred] + [
                a for a in problem.action_ids if a != self.preferred
            ]
        return self.untried

    def child_order(self) -> list[int]:
        """Deterministic iteration order: policy pick first, then by id, so
        exact score/visit ties resolve toward the policy."""
        ids = sorted(self.children)
        if self.preferred in self.children:
            ids.remove(self.preferred)
            ids.insert(0, self.preferred)
        return ids

    @property
    def mean_value(self) -> float:
        return self.total_value / self.visits if self.visits else 0.0


@dataclass(slots=True)
class Plan:
    primitives: list[int]
    predicted_trace: stl.Trace
    robustness: float
    most_likely_branch: list[LocalPoint]
    goal_runway: str
    start_state: AircraftState
    states_1s: list[AircraftState]      # fine-grained path for the safety filter
    states_stride: list[AircraftState]  # one state per primitive boundary
    degraded: bool = False
    safety_modified: bool = False
    rebuild: Optional[Callable[[Sequence[int]], "Plan"]] = None
    # states-only rebuild for candidate screening (no trace, no monitor)
    resimulate: Optional[Callable[[Sequence[int]], list[AircraftState]]] = None


class _FlightProblem:
    """The planning domain: primitive dynamics against forecast traffic."""

    def __init__(
        self,
        airfield: AirfieldModel,
        runway: Runway,
        goal: PilotIntent,
        forecasts: Sequence[TrajectoryForecast],
        limits: ControlLimits,
        config: PlannerConfig,
        rule_config: Optional[rules.RuleConfig] = None,
    ):
        self.airfield = airfield
        self.runway = runway
        self.goal = goal
        self.forecasts = list(forecasts)
        self.limits = limits
        self.config = config
        self.rule_config = rule_config or rules.RuleConfig()
        self.primitives = default_primitive_set(limits)
        self.action_ids = [p.id for p in self.primitives]
        self.stride_s = PRIMITIVE_DURATION_S
        self.lands = goal.kind in (IntentKind.LANDING, IntentKind.CHANGE_RUNWAY)

    def make_route(self, state: AircraftState) -> tuple[list[LocalPoint], bool]:
        return route_mod.goal_route(
            self.airfield, self.runway, state.position, state.heading_deg, self.goal.kind
        )

    def set_route(self, waypoints: list[LocalPoint], loop: bool) -> None:
        self.route = waypoints
        self.loop = loop
        # suffix[i] = chain length from waypoint i to the route end
        suffix = [0.0] * len(waypoints)
        for i in range(len(waypoints) - 2, -1, -1):
            suffix[i] = suffix[i + 1] + waypoints[i].horizontal_to(waypoints[i + 1])
        self.suffix = suffix

    def advance_index(self, index: int, position: LocalPoint) -> int:
        wps = self.route
        n = len(wps)
        for _ in range(n):
            if not self.loop and index == n - 1:
                return index
            active = wps[index % n]
            nxt = wps[(index + 1) % n] if (self.loop or index + 1 < n) else None
            captured = position.horizontal_to(active) <= 150.0
            if not captured and not (
                nxt is not None and passed_abeam(active, nxt, position)
            ):
                return index
            index = (index + 1) % n if self.loop else index + 1
        return index

    def dist_to_go(self, index: int, position: LocalPoint) -> float:
        active = self.route[index % len(self.route)]
        d = position.horizontal_to(active)
        if not self.loop:
            d += self.suffix[min(index, len(self.suffix) - 1)]
        return d

    def step(self, state: AircraftState, wp_index: int, action: int):
        nxt = apply_primitive(state, self.primitives[action], self.limits)
        idx = self.advance_index(wp_index, nxt.position)
        terminal = self.lands and landed(nxt, self.runway.threshold)
        return nxt, idx, terminal

    def policy_action(self, state: AircraftState, wp_index: int) -> int:
        idx = self.advance_index(wp_index, state.position)
        n = len(self.route)
        active = self.route[idx % n]
        after: Optional[LocalPoint] = None
        if self.loop:
            after = self.route[(idx + 1) % n]
        elif idx + 1 < n:
            after = self.route[idx + 1]
        final = None if self.loop else self.route[-1]
        return select_primitive(
            state, active, after, self.limits, self.primitives, final_target=final
        ).id

    def intruder_paths(self, times: Sequence[float]) -> list[list[LocalPoint]]:
        return [
            [fc.position_at(t) for t in times]
            for fc in self.forecasts
            if fc.samples
        ]

    def trace_for(self, states: Sequence[AircraftState],
                  indices: Sequence[int]) -> stl.Trace:
        times = [s.time_s for s in states]
        dist = [self.dist_to_go(i, s.position) for i, s in zip(indices, states)]
        n_route = len(self.route)
        alt_dev = [
            abs(s.position.z - self.route[i % n_route].z)
            for i, s in zip(indices, states)
        ]
        return rules.build_rule_trace(
            states,
            self.intruder_paths(times),
            self.airfield,
            self.runway,
            self.stride_s,
            self.rule_config,
            extra_channels={"dist_to_go": dist, "alt_dev": alt_dev},
            limits=self.limits,
        )

    def path_return(self, states, indices) -> float:
        """Discounted return over a root-anchored state path."""
        trace = self.trace_for(states, indices)
        return discounted_return(
            rollout_reward(trace, self.goal, self.config, self.limits),
            self.config.discount,
        )


def rollout_reward(
    trace: stl.Trace,
    goal: PilotIntent,
    config: PlannerConfig,
    limits: ControlLimits = DEFAULT_LIMITS,
) -> list[float]:
    """Per-step shaped rewards over a rollout trace.

    Each step earns normalized progress along the goal route, pays the rule
    penalty on any negative margin, and pays for straying from the corridors
    laterally or vertically; steps clamp to [-100, 1] before discounting.
    The deviation scale (meters per reward unit) is deliberately tight so
    that profile-keeping separates otherwise-tied actions within a small
    search budget.
    """
    n = len(trace)
    if n == 0:
        raise ValueError("empty trace")
    margins = trace.channels["rule_margin"]
    dist = trace.channels.get("dist_to_go")
    alt_dev = trace.channels.get("alt_dev")
    in_pattern = trace.channels["in_pattern"]
    rewards: list[float] = []
    max_step = max(limits.cruise_speed_mps * trace.stride_s, 1.0)
    for k in range(1, n):
        progress = (dist[k - 1] - dist[k]) / max_step if dist is not None else 0.0
        penalty = config.stl_penalty_weight * min(0.0, margins[k])
        deviation = max(0.0, -in_pattern[k])
        if alt_dev is not None:
            deviation += alt_dev[k]
        social = -config.social_weight * deviation / DEVIATION_SCALE_M
        r = config.progress_weight * progress + penalty + social
        rewards.append(max(REWARD_STEP_MIN, min(REWARD_STEP_MAX, r)))
    return rewards


def discounted_return(rewards: Sequence[float], discount: float) -> float:
    total = 0.0
    factor = 1.0
    for r in rewards:
        total += factor * r
        factor *= discount
    return total


def social_policy(
    state: AircraftState,
    goal: PilotIntent,
    airfield: AirfieldModel,
    limits: ControlLimits = DEFAULT_LIMITS,
) -> MotionPrimitive:
    """Heuristic rollout policy: follow the pattern route toward the goal."""
    if goal.runway is None:
        raise ValueError("social_policy needs a goal with a resolved runway")
    runway = airfield.runway(goal.runway)
    if goal.kind in (IntentKind.LANDING, IntentKind.CHANGE_RUNWAY) and \
            landed(state, runway.threshold):
        return NEUTRAL_PRIMITIVE
    waypoints, loop = route_mod.goal_route(
        airfield, runway, state.position, state.heading_deg, goal.kind
    )
    prims = default_primitive_set(limits)
    idx = 0
    while idx < len(waypoints) - 1 and \
            state.position.horizontal_to(waypoints[idx]) <= 150.0:
        idx += 1
    after = waypoints[idx + 1] if idx + 1 < len(waypoints) else (
        waypoints[0] if loop else None
    )
    final = None if loop else waypoints[-1]
    return select_primitive(
        state, waypoints[idx], after, limits, prims, final_target=final
    )


def most_likely_branch(root: MctsNode) -> list[LocalPoint]:
    """Ego positions down the visit-heaviest branch."""
    points = [root.state.position]
    node = root
    while node.children:
        node = node.children[_greedy_child_id(node)]
        points.append(node.state.position)
    return points


def _greedy_child_id(node: MctsNode) -> int:
    best_id = None
    best_visits = -1
    for pid in node.child_order():
        v = node.children[pid].visits
        if v > best_visits:
            best_visits, best_id = v, pid
    return best_id


def _select_child(node: MctsNode, c: float) -> MctsNode:
    best = None
    best_score = -math.inf
    for pid in node.child_order():
        child = node.children[pid]
        score = uct_score(node.visits, child.visits, child.mean_value, c)
        if score > best_score:
            best, best_score = child, score
    return best


def plan(
    ego: AircraftState,
    goal: PilotIntent,
    beliefs: Sequence[AgentBelief],
    airfield: AirfieldModel,
    wind: WindState,
    config: Optional[PlannerConfig] = None,
    limits: ControlLimits = DEFAULT_LIMITS,
    rule_config: Optional[rules.RuleConfig] = None,
    route: Optional[tuple[list[LocalPoint], bool, int]] = None,
) -> Plan:
    """Search a primitive sequence that advances the goal while honoring the
    pattern rules, given forecasts for everyone else.

    `route` is (waypoints, loops, active index) when the caller tracks route
    progress across replans (the engine does); otherwise the route is derived
    fresh from the current state.
    """
    cfg = config or PlannerConfig()
    cfg.validate()
    if goal.kind is IntentKind.NONE:
        raise ValueError("planner needs a goal intent")
    runway = (
        airfield.runway(goal.runway) if goal.runway is not None
        else preferred_runway(airfield, wind)
    )
    goal = PilotIntent(goal.kind, runway.designator)
    forecasts = [
        intent_mod.predict(b, airfield, wind, limits=limits) for b in beliefs
    ]
    problem = _FlightProblem(airfield, runway, goal, forecasts, limits, cfg, rule_config)
    start_index = 0
    if route is not None:
        waypoints, loops, start_index = route
        problem.set_route(waypoints, loops)
    else:
        problem.set_route(*problem.make_route(ego))

    degraded_plan = _degraded_escape(problem, ego, cfg, start_index)
    if degraded_plan is not None:
        return degraded_plan

    root = MctsNode(ego, start_index, False, 0, None)
    for _ in range(cfg.iterations):
        _run_iteration(root, problem, cfg)

    # guarded extraction: the tree's visit-greedy line must evaluate at least
    # as well as the plain social-policy rollout, else the policy flies. At
    # practical iteration budgets visit counts on near-tied actions are noise,
    # and acting on that noise destabilizes the closed loop; the search still
    # wins whenever it finds something genuinely better (traffic, rule gains).
    greedy = _greedy_sequence(root, problem, cfg.max_depth)
    baseline = _policy_sequence(problem, ego, start_index, cfg.max_depth)
    chosen = greedy
    if greedy != baseline:
        if _sequence_return(problem, ego, greedy, start_index, cfg) < \
                _sequence_return(problem, ego, baseline, start_index, cfg):
            chosen = baseline
    return _finalize(problem, ego, chosen, root, cfg, start_index=start_index)


def _policy_sequence(
    problem: _FlightProblem, ego: AircraftState, start_index: int, max_depth: int
) -> list[int]:
    sequence: list[int] = []
    state, idx, terminal = ego, start_index, False
    while len(sequence) < max_depth and not terminal:
        action = problem.policy_action(state, idx)
        sequence.append(action)
        state, idx, terminal = problem.step(state, idx, action)
    return sequence


def _sequence_return(
    problem: _FlightProblem, ego: AircraftState, sequence: Sequence[int],
    start_index: int, cfg: PlannerConfig,
) -> float:
    _, stride_states, indices = simulate_sequence(problem, ego, sequence, start_index)
    return problem.path_return(stride_states, indices)


def _run_iteration(root: MctsNode, problem: _FlightProblem, cfg: PlannerConfig) -> None:
    node = root
    path = [root]
    while not node.terminal and not node.expandable() and node.children \
            and node.depth < cfg.max_depth:
        node = _select_child(node, cfg.uct_c)
        path.append(node)

    if not node.terminal and node.depth < cfg.max_depth and node.expandable():
        action = node.untried_actions(problem).pop(0)
        state, idx, terminal = problem.step(node.state, node.wp_index, action)
        child = MctsNode(state, idx, terminal, node.depth + 1, action)
        node.children[action] = child
        node = child
        path.append(child)

    states = [n.state for n in path]
    indices = [n.wp_index for n in path]
    state, idx, terminal = node.state, node.wp_index, node.terminal
    depth = node.depth
    while depth < cfg.max_depth and not terminal:
        action = problem.policy_action(state, idx)
        state, idx, terminal = problem.step(state, idx, action)
        states.append(state)
        indices.append(idx)
        depth += 1

    value = problem.path_return(states, indices)
    for n in path:
        n.visits += 1
        n.total_value += value


def _greedy_sequence(root: MctsNode, problem: _FlightProblem, max_depth: int) -> list[int]:
    """Visit-greedy actions from the tree, padded by the policy to max depth."""
    sequence: list[int] = []
    node = root
    while node.children and len(sequence) < max_depth:
        best_id = _greedy_child_id(node)
        sequence.append(best_id)
        node = node.children[best_id]
    state, idx, terminal = node.state, node.wp_index, node.terminal
    while len(sequence) < max_depth and not terminal:
        action = problem.policy_action(state, idx)
        sequence.append(action)
        state, idx, terminal = problem.step(state, idx, action)
    return sequence


def simulate_sequence(
    problem: _FlightProblem, ego: AircraftState, sequence: Sequence[int],
    start_index: int = 0,
) -> tuple[list[AircraftState], list[AircraftState], list[int]]:
    """Fine (1 s) and stride states along a primitive sequence."""
    fine = [ego]
    stride_states = [ego]
    indices = [problem.advance_index(start_index, ego.position)]
    state = ego
    idx = indices[0]
    terminal = False
    for action in sequence:
        prim = problem.primitives[action]
        if terminal:
            frozen = AircraftState(
                position=state.position, heading_deg=state.heading_deg,
                speed_mps=0.0, time_s=state.time_s + prim.duration_s,
            )
            fine.extend([frozen] * int(prim.duration_s))
            state = frozen
        else:
            inner = state
            for _ in range(int(prim.duration_s)):
                inner = step(inner, prim, 1.0, problem.limits)
                fine.append(inner)
            state = inner
            idx = problem.advance_index(idx, state.position)
            if problem.lands and landed(state, problem.runway.threshold):
                terminal = True
        stride_states.append(state)
        indices.append(idx)
    return fine, stride_states, indices


def _finalize(
    problem: _FlightProblem,
    ego: AircraftState,
    sequence: list[int],
    root: Optional[MctsNode],
    cfg: PlannerConfig,
    degraded: bool = False,
    start_index: int = 0,
) -> Plan:
    fine, stride_states, indices = simulate_sequence(problem, ego, sequence, start_index)
    trace = problem.trace_for(stride_states, indices)
    rob = stl.robustness(
        rules.pattern_rules(problem.airfield, problem.runway, problem.rule_config),
        trace, 0,
    )
    branch = most_likely_branch(root) if root is not None else [ego.position]
    return Plan(
        primitives=list(sequence),
        predicted_trace=trace,
        robustness=rob,
        most_likely_branch=branch,
        goal_runway=problem.runway.designator,
        start_state=ego,
        states_1s=fine,
        states_stride=stride_states,
        degraded=degraded,
        rebuild=lambda seq: _finalize(
            problem, ego, list(seq), None, cfg, start_index=start_index
        ),
        resimulate=lambda seq: simulate_sequence(
            problem, ego, list(seq), start_index
        )[0],
    )


def _degraded_escape(
    problem: _FlightProblem, ego: AircraftState, cfg: PlannerConfig,
    start_index: int = 0,
) -> Optional[Plan]:
    """If every immediate primitive already breaches hard separation, skip the
    search and return the least-bad single step, flagged."""
    if not problem.forecasts:
        return None
    best_margin = -math.inf
    best_action = 0
    all_breach = True
    for action in problem.action_ids:
        state, idx, _ = problem.step(ego, start_index, action)
        trace = problem.trace_for([ego, state], [start_index, idx])
        margin = trace.channels["sep"][1] - problem.rule_config.d_min_m
        if margin >= 0.0:
            all_breach = False
            break
        if margin > best_margin:
            best_margin, best_action = margin, action
    if not all_breach:
        return None
    return _finalize(problem, ego, [best_action], None, cfg,
                     degraded=True, start_index=start_index)
