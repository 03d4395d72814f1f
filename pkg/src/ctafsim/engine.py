"""Deterministic fixed-timestep world engine.

Tick order is fixed: deliver last tick's broadcasts, then AI agents (belief
update, replan when due or on new traffic intent, safety filter, one dynamics
step), then scripted agents (directives plus route following), then human
agents (latched cockpit command), then recording. Broadcasts queued during a
tick go out at its end and land in inboxes at the start of the next one, so
nobody acts on a call in the tick it was made. All iteration is in sorted
agent-id order; given a scenario, a seed, and the inbound command stream, the
event log is reproducible byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import planner as planner_mod
from . import radio as radio_mod
from . import rules, safety, stl
from .dynamics import (
    AircraftState,
    MotionPrimitive,
    NEUTRAL_PRIMITIVE,
    PRIMITIVE_DURATION_S,
    SpeedCmd,
    Turn,
    Vertical,
    WaypointFollower,
    default_primitive_set,
    landed,
    step,
)
from .geo import (
    LocalPoint,
    bearing_between,
    classify_leg,
    point_segment_distance,
    preferred_runway,
)
from .intent import AgentBelief
from .radio import IntentKind, PilotIntent, RadioCall, UnparseableCall
from .route import goal_route
from .scenario import AgentSpec, Scenario, goal_intent


class AgentKind:
    AI = "ai"
    SCRIPTED = "scripted"
    HUMAN = "human"


class AgentStatus:
    ACTIVE = "active"
    FINISHED = "finished"


@dataclass(slots=True)
class InboundCommand:
    """A cockpit command drained into a tick (already claim-checked)."""

    agent_id: str
    kind: str                      # "control" | "radio" | "intent"
    turn: Optional[str] = None
    vertical: Optional[str] = None
    speed_cmd: Optional[str] = None
    text: Optional[str] = None
    goal_kind: Optional[str] = None
    goal_runway: Optional[str] = None


class Agent:
    """Runtime state for one aircraft in the world."""

    def __init__(self, spec: AgentSpec, engine: "Engine"):
        self.id = spec.id
        self.kind = spec.kind
        self.status = AgentStatus.ACTIVE
        self.state = AircraftState(
            position=LocalPoint(spec.x, spec.y, spec.z),
            heading_deg=spec.heading_deg,
            speed_mps=spec.speed_mps,
        )
        self.goal = goal_intent(spec.goal)
        self.script = list(spec.script)
        self.script_fired = [False] * len(self.script)
        self.inbox: list[RadioCall] = []
        self.current_primitive: MotionPrimitive = NEUTRAL_PRIMITIVE
        self.landed_runway: Optional[str] = None
        # AI-only machinery
        self.beliefs: dict[str, AgentBelief] = {}
        self.plan: Optional[planner_mod.Plan] = None
        self.plan_tick: int = -10_000
        self.has_broadcast = False
        # route following: scripted agents steer by it directly, the AI keeps
        # it as sticky route context across replans
        self.follower: Optional[WaypointFollower] = None
        self.follower_goal: Optional[PilotIntent] = None
        self.hold_course = False
        self._engine = engine

    def resolve_goal_runway(self) -> None:
        if self.goal.kind is not IntentKind.NONE and self.goal.runway is None:
            rwy = preferred_runway(self._engine.airfield, self._engine.wind)
            self.goal = PilotIntent(self.goal.kind, rwy.designator)

    def rebuild_follower(self) -> None:
        if self.goal.kind is IntentKind.NONE or self.goal.runway is None:
            self.follower = None
            return
        runway = self._engine.airfield.runway(self.goal.runway)
        waypoints, loop = goal_route(
            self._engine.airfield, runway, self.state.position,
            self.state.heading_deg, self.goal.kind,
        )
        self.follower = WaypointFollower(waypoints, loop=loop)
        self.follower_goal = self.goal

    OFF_ROUTE_REBUILD_M = 1200.0

    def ensure_route(self) -> None:
        """Keep the route unless the goal changed or we have drifted far off;
        a pilot flies their plan instead of re-deriving it every broadcast."""
        if self.follower is None or self.follower_goal != self.goal:
            self.rebuild_follower()
            return
        self.follower.advance(self.state.position)
        fol = self.follower
        if fol is None or fol.loop or fol.index == 0:
            return
        # cross-track to the leg being flown; distance to the next corner
        # itself is legitimately large right after sequencing
        prev = fol.waypoints[fol.index - 1]
        active = fol.active
        off = point_segment_distance(
            self.state.position.x, self.state.position.y,
            prev.x, prev.y, active.x, active.y,
        )
        if off > self.OFF_ROUTE_REBUILD_M:
            self.rebuild_follower()


class Engine:
    """Owns the world exclusively; one caller drives tick()."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.airfield = scenario.airfield
        self.wind = scenario.wind
        self.limits = scenario.limits
        self.dt = scenario.dt_s
        self.time_s = 0.0
        self.tick_index = 0
        self.agents: dict[str, Agent] = {}
        for spec in scenario.spec.agents:
            self.agents[spec.id] = Agent(spec, self)
        self.radio_log: list[tuple[float, RadioCall]] = []
        self.radio_tail: list[tuple[float, str, str]] = []  # (time, agent, text)
        self.events: list[dict] = []
        # queued -> (one tick later) on the air and logged -> (next tick)
        # heard; the mic delay keeps cause and effect on distinct timestamps
        self._outgoing: list[tuple[str, str]] = []
        self._transmitting: list[tuple[str, str]] = []
        self._pending: list[tuple[str, str]] = []
        self._commands: list[InboundCommand] = []
        self._primitive_alphabet = default_primitive_set(self.limits)
        self.stage = StageDetector(self)
        self._finished_all_tick: Optional[int] = None
        self._record_header()
        for agent in self._sorted_agents():
            if agent.kind == AgentKind.AI:
                agent.resolve_goal_runway()
            elif agent.kind == AgentKind.SCRIPTED:
                agent.rebuild_follower()

    # -- helpers ----------------------------------------------------------

    def _sorted_agents(self) -> list[Agent]:
        return [self.agents[k] for k in sorted(self.agents)]

    def active_agents(self) -> list[Agent]:
        return [a for a in self._sorted_agents() if a.status == AgentStatus.ACTIVE]

    def submit_command(self, command: InboundCommand) -> None:
        """Queue an external command; drained at the next tick start."""
        self._commands.append(command)

    def record(self, kind: str, payload: dict) -> None:
        self.events.append({"t": self.time_s, "kind": kind, "payload": payload})

    def _record_header(self) -> None:
        self.record("scenario", {"spec": self.scenario.raw, "seed": self.scenario.seed})

    # -- radio -------------------------------------------------------------

    def broadcast(self, agent_id: str, text: str) -> None:
        """Queue a transmission; it hits the log now and inboxes next tick."""
        agent = self.agents[agent_id]
        if agent.status != AgentStatus.ACTIVE:
            raise ValueError(f"agent {agent_id} cannot broadcast after finishing")
        self._outgoing.append((agent_id, text))

    def _flush_outgoing(self) -> None:
        transmitting = sorted(self._transmitting, key=lambda item: item[0])
        self._transmitting = self._outgoing
        self._outgoing = []
        for agent_id, text in transmitting:
            try:
                call = radio_mod.parse_call(text)
                parsed = True
            except UnparseableCall:
                call = RadioCall(airfield_name="", raw_text=text, low_confidence=True)
                parsed = False
            self.radio_log.append((self.time_s, call))
            self.radio_tail.append((self.time_s, agent_id, text))
            self._pending.append((agent_id, text))
            self.record("radio", {
                "agent_id": agent_id,
                "text": text,
                "parsed": parsed,
                "intent": call.intent.kind.value,
                "runway": call.intent.runway,
                "low_confidence": call.low_confidence,
            })
            self.stage.on_broadcast(agent_id, call)

    def _deliver_pending(self) -> None:
        for agent in self._sorted_agents():
            agent.inbox.clear()
        for sender_id, text in self._pending:
            try:
                call = radio_mod.parse_call(text)
            except UnparseableCall:
                continue  # listeners ignore garbled calls
            call_sender = sender_id
            for agent in self._sorted_agents():
                if agent.id != call_sender:
                    agent.inbox.append(call)
        self._pending.clear()

    # -- tick --------------------------------------------------------------

    def tick(self) -> None:
        self._deliver_pending()
        self._drain_commands()
        for agent in self._sorted_agents():
            if agent.status != AgentStatus.ACTIVE:
                continue
            if agent.kind == AgentKind.AI:
                self._tick_ai(agent)
            elif agent.kind == AgentKind.SCRIPTED:
                self._tick_scripted(agent)
            else:
                self._tick_human(agent)
        self._record_states()
        self.stage.on_tick_end()
        self._flush_outgoing()
        self.time_s += self.dt
        self.tick_index += 1

    def run(self, max_ticks: Optional[int] = None) -> list[dict]:
        limit = self.scenario.time_limit_s
        while self.time_s < limit:
            if max_ticks is not None and self.tick_index >= max_ticks:
                break
            self.tick()
            if all(a.status == AgentStatus.FINISHED for a in self._sorted_agents()):
                break
        self.record("end", {
            "reason": "all_finished"
            if all(a.status == AgentStatus.FINISHED for a in self._sorted_agents())
            else "time_limit",
        })
        return self.events

    # -- command handling ----------------------------------------------------

    def _drain_commands(self) -> None:
        commands, self._commands = self._commands, []
        for cmd in commands:
            agent = self.agents.get(cmd.agent_id)
            if agent is None or agent.status != AgentStatus.ACTIVE:
                continue
            self.record("command", {
                "agent_id": cmd.agent_id, "kind": cmd.kind,
                "turn": cmd.turn, "vertical": cmd.vertical,
                "speed_cmd": cmd.speed_cmd, "text": cmd.text,
                "goal_kind": cmd.goal_kind, "goal_runway": cmd.goal_runway,
            })
            if cmd.kind == "control":
                agent.current_primitive = self._primitive_from(cmd)
            elif cmd.kind == "radio" and cmd.text:
                self.broadcast(agent.id, cmd.text)
            elif cmd.kind == "intent" and cmd.goal_kind:
                agent.goal = PilotIntent(IntentKind(cmd.goal_kind), cmd.goal_runway)

    def _primitive_from(self, cmd: InboundCommand) -> MotionPrimitive:
        turn = Turn(cmd.turn or "straight")
        vertical = Vertical(cmd.vertical or "level")
        speed = SpeedCmd(cmd.speed_cmd or "hold")
        for prim in self._primitive_alphabet:
            if prim.turn is turn and prim.vertical is vertical and prim.speed_cmd is speed:
                return prim
        # combinations outside the alphabet fall back to the closest turn match
        for prim in self._primitive_alphabet:
            if prim.turn is turn and prim.vertical is vertical:
                return prim
        return NEUTRAL_PRIMITIVE

    # -- AI agent ------------------------------------------------------------

    def _tick_ai(self, agent: Agent) -> None:
        radio_triggered = False
        for call in agent.inbox:
            sender = self._sender_of(call)
            if sender is None or sender == agent.id:
                continue
            intent = radio_mod.intent_of_call(call)
            belief = agent.beliefs.setdefault(
                sender, AgentBelief(sender, self.agents[sender].state)
            )
            if intent.kind is not IntentKind.NONE:
                belief.heard(intent, self.time_s)
                radio_triggered = True
                self.stage.on_belief_update(agent.id, sender, intent)

        for other in self.active_agents():
            if other.id == agent.id:
                continue
            belief = agent.beliefs.setdefault(other.id, AgentBelief(other.id, other.state))
            belief.last_state = other.state

        due = (self.tick_index - agent.plan_tick) * self.dt >= self.scenario.replan_period_s
        if agent.plan is None or due or radio_triggered:
            self._replan(agent, announce=agent.plan is None or radio_triggered)

        prim = self._plan_primitive(agent)
        agent.current_primitive = prim
        agent.state = step(agent.state, prim, self.dt, self.limits)
        if agent.follower is not None:
            agent.follower.advance(agent.state.position)
        self._check_landing(agent)

    def _sender_of(self, call: RadioCall) -> Optional[str]:
        """Map a call back to the agent whose callsign matches."""
        for agent_id in sorted(self.agents):
            if agent_id.upper() == call.callsign:
                return agent_id
        return None

    def _replan(self, agent: Agent, announce: bool) -> None:
        beliefs = [
            b for other_id, b in sorted(agent.beliefs.items())
            if self.agents[other_id].status == AgentStatus.ACTIVE
        ]
        old_runway = agent.goal.runway
        agent.resolve_goal_runway()
        agent.ensure_route()
        route_state = None
        if agent.follower is not None:
            route_state = (
                agent.follower.waypoints, agent.follower.loop, agent.follower.index
            )
        new_plan = planner_mod.plan(
            agent.state, agent.goal, beliefs, self.airfield, self.wind,
            self.scenario.planner_config, self.limits, self.scenario.rule_config,
            route=route_state,
        )
        modified = False
        if self.scenario.safety_enabled and beliefs:
            pattern_side = self.airfield.runway(new_plan.goal_runway).pattern_side
            new_plan, modified = safety.filter_plan(
                new_plan, beliefs, self.scenario.safety_config, self.limits,
                pattern_side, rebuild=new_plan.rebuild,
            )
        agent.plan = new_plan
        agent.plan_tick = self.tick_index
        agent.goal = PilotIntent(agent.goal.kind, new_plan.goal_runway)
        self.record("plan", {
            "agent_id": agent.id,
            "goal_kind": agent.goal.kind.value,
            "goal_runway": new_plan.goal_runway,
            "robustness": round(new_plan.robustness, 3),
            "primitives": list(new_plan.primitives),
            "degraded": new_plan.degraded,
            "safety_modified": modified,
            "branch": [
                [round(p.x, 1), round(p.y, 1), round(p.z, 1)]
                for p in new_plan.most_likely_branch
            ],
        })
        if modified or new_plan.degraded:
            self.record("safety", {
                "agent_id": agent.id,
                "modified": modified,
                "degraded": new_plan.degraded,
            })
        self.stage.on_plan(agent.id, new_plan.goal_runway)
        if announce or new_plan.goal_runway != old_runway:
            self.broadcast(agent.id, self._announce_text(agent))

    def _announce_text(self, agent: Agent) -> str:
        runway = self.airfield.runway(agent.goal.runway)
        leg = classify_leg(
            self.airfield, runway, agent.state.position, agent.state.heading_deg
        )
        if leg is not None:
            position = radio_mod.LegReport(leg, runway.designator)
        else:
            dist_nm = max(
                1, round(agent.state.position.horizontal_to(LocalPoint(0, 0, 0)) / 1852.0)
            )
            bearing = bearing_between(
                0.0, 0.0, agent.state.position.x, agent.state.position.y
            )
            cardinal = radio_mod.CARDINALS[int(round(bearing / 45.0)) % 8]
            position = radio_mod.BearingReport(dist_nm, cardinal)
        call = RadioCall(
            airfield_name=self.airfield.name,
            callsign=agent.id.upper(),
            position=position,
            intent=agent.goal,
        )
        return radio_mod.generate_call(call)

    def _plan_primitive(self, agent: Agent) -> MotionPrimitive:
        plan = agent.plan
        if plan is None or not plan.primitives:
            return NEUTRAL_PRIMITIVE
        elapsed = (self.tick_index - agent.plan_tick) * self.dt
        idx = min(int(elapsed // PRIMITIVE_DURATION_S), len(plan.primitives) - 1)
        return self._primitive_alphabet[plan.primitives[idx]]

    # -- scripted agent --------------------------------------------------------

    def _tick_scripted(self, agent: Agent) -> None:
        # steps fire strictly in order, at most one per tick, so scripted
        # reactions cannot leapfrog the exchange they answer
        for i, step_spec in enumerate(agent.script):
            if agent.script_fired[i]:
                continue
            if not self._script_due(agent, step_spec):
                break
            agent.script_fired[i] = True
            action = step_spec.action
            if action.broadcast:
                self.broadcast(agent.id, action.broadcast)
            if action.set_goal is not None:
                agent.goal = goal_intent(action.set_goal)
                agent.rebuild_follower()
            if action.hold_course:
                agent.hold_course = True
                agent.follower = None
            break

        if agent.hold_course or agent.follower is None:
            prim = agent.current_primitive if agent.hold_course else NEUTRAL_PRIMITIVE
        else:
            prim = agent.follower.next_primitive(
                agent.state, self.limits, self._primitive_alphabet
            )
        agent.current_primitive = prim
        agent.state = step(agent.state, prim, self.dt, self.limits)
        self._check_landing(agent)

    def _script_due(self, agent: Agent, step_spec) -> bool:
        if step_spec.at_s is not None:
            return self.time_s >= step_spec.at_s
        cond = step_spec.when.heard_intent
        for call in agent.inbox:
            sender = self._sender_of(call)
            if cond.from_agent is not None and sender != cond.from_agent:
                continue
            intent = radio_mod.intent_of_call(call)
            if intent.kind is IntentKind.NONE:
                continue
            if cond.kind is not None and intent.kind.value != cond.kind:
                continue
            if cond.runway is not None and intent.runway != cond.runway:
                continue
            return True
        return False

    # -- human agent -------------------------------------------------------------

    def _tick_human(self, agent: Agent) -> None:
        agent.state = step(agent.state, agent.current_primitive, self.dt, self.limits)
        self._check_landing(agent)

    # -- shared -------------------------------------------------------------------

    def _check_landing(self, agent: Agent) -> None:
        if agent.goal.kind not in (IntentKind.LANDING, IntentKind.CHANGE_RUNWAY):
            return
        if agent.goal.runway is None:
            return
        runway = self.airfield.runway(agent.goal.runway)
        if landed(agent.state, runway.threshold):
            agent.status = AgentStatus.FINISHED
            agent.landed_runway = runway.designator
            self.record("landed", {
                "agent_id": agent.id, "runway": runway.designator,
            })
            self.stage.on_finished(agent.id, runway.designator)

    def _record_states(self) -> None:
        for agent in self._sorted_agents():
            st = agent.state
            self.record("state", {
                "agent_id": agent.id,
                "kind": agent.kind,
                "status": agent.status,
                "x": round(st.position.x, 6),
                "y": round(st.position.y, 6),
                "z": round(st.position.z, 6),
                "heading_deg": round(st.heading_deg, 6),
                "speed_mps": round(st.speed_mps, 6),
            })

    # -- separation audit ------------------------------------------------------------

    def min_separation_now(self) -> Optional[tuple[float, float]]:
        """(horizontal, vertical) gap of the closest active pair, or None."""
        active = self.active_agents()
        best: Optional[tuple[float, float]] = None
        for i in range(len(active)):
            for j in range(i + 1, len(active)):
                a, b = active[i].state.position, active[j].state.position
                h = a.horizontal_to(b)
                v = abs(a.z - b.z)
                if best is None or h < best[0]:
                    best = (h, v)
        return best


class StageDetector:
    """Sequential milestone detector for the coordinated-landing demo.

    Fires STAGE events 1..6 in order: wrong-runway announcement, the AI
    hearing it, the AI naming the preferred runway, the change-of-intent
    reply, the AI's plan on the preferred runway, and both aircraft down.
    """

    def __init__(self, engine: Engine):
        self.engine = engine
        self.reached = 0
        self.preferred = preferred_runway(engine.airfield, engine.wind).designator

    def _fire(self, number: int, label: str, detail: dict) -> None:
        self.reached = number
        payload = {"stage": number, "label": label}
        payload.update(detail)
        self.engine.record("stage", payload)

    def _is_ai(self, agent_id: str) -> bool:
        agent = self.engine.agents.get(agent_id)
        return agent is not None and agent.kind == AgentKind.AI

    def on_broadcast(self, agent_id: str, call: RadioCall) -> None:
        intent = call.intent
        if self.reached == 0 and not self._is_ai(agent_id):
            if intent.kind is IntentKind.LANDING and intent.runway is not None \
                    and intent.runway != self.preferred:
                self._fire(1, "wrong_runway_announced",
                           {"agent_id": agent_id, "runway": intent.runway})
        elif self.reached == 2 and self._is_ai(agent_id):
            if intent.runway == self.preferred:
                self._fire(3, "ai_announced_preferred",
                           {"agent_id": agent_id, "runway": intent.runway})
        elif self.reached == 3 and not self._is_ai(agent_id):
            if intent.kind is IntentKind.CHANGE_RUNWAY and intent.runway == self.preferred:
                self._fire(4, "human_changed_intent",
                           {"agent_id": agent_id, "runway": intent.runway})

    def on_belief_update(self, ai_id: str, sender: str, intent: PilotIntent) -> None:
        if self.reached == 1 and self._is_ai(ai_id):
            if intent.kind is IntentKind.LANDING and intent.runway is not None \
                    and intent.runway != self.preferred:
                self._fire(2, "ai_heard_wrong_runway",
                           {"agent_id": ai_id, "from": sender, "runway": intent.runway})

    def on_plan(self, agent_id: str, goal_runway: str) -> None:
        if self.reached == 4 and self._is_ai(agent_id) and goal_runway == self.preferred:
            self._fire(5, "ai_replanned_preferred",
                       {"agent_id": agent_id, "runway": goal_runway})

    def on_finished(self, agent_id: str, runway: str) -> None:
        pass  # checked on tick end so "all finished" is a single event

    def on_tick_end(self) -> None:
        if self.reached != 5:
            return
        agents = self.engine._sorted_agents()
        if all(a.status == AgentStatus.FINISHED for a in agents) and \
                all(a.landed_runway == self.preferred for a in agents):
            self._fire(6, "coordinated_landing_complete", {"runway": self.preferred})


# ---------------------------------------------------------------------------
# log serialization, trajectory export, replay


def dump_events(events: Iterable[dict]) -> str:
    """Newline-delimited JSON with stable key order."""
    return "\n".join(json.dumps(e, separators=(",", ":")) for e in events) + "\n"


def load_events(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def trajectory_csv(events: Iterable[dict], dt_s: float = 1.0) -> str:
    """TrajAir-style flat table: one row per agent per tick."""
    lines = ["tick,time_s,agent_id,x_m,y_m,z_m,heading_deg,speed_mps"]
    for e in events:
        if e["kind"] != "state":
            continue
        p = e["payload"]
        tick = int(round(e["t"] / dt_s))
        lines.append(
            f"{tick},{e['t']},{p['agent_id']},{p['x']},{p['y']},{p['z']},"
            f"{p['heading_deg']},{p['speed_mps']}"
        )
    return "\n".join(lines) + "\n"


def run_scenario(scenario: Scenario) -> list[dict]:
    """Headless run to completion; returns the event log."""
    return Engine(scenario).run()


def replay(events: list[dict]) -> list[dict]:
    """Re-simulate from the log header and recorded command stream; the
    reproduced state events must match the original log."""
    from .scenario import scenario_from_dict

    header = next(e for e in events if e["kind"] == "scenario")
    scenario = scenario_from_dict(header["payload"]["spec"])
    commands_by_time: dict[float, list[dict]] = {}
    for e in events:
        if e["kind"] == "command":
            commands_by_time.setdefault(e["t"], []).append(e["payload"])

    engine = Engine(scenario)
    limit = scenario.time_limit_s
    while engine.time_s < limit:
        for payload in commands_by_time.get(engine.time_s, []):
            engine.submit_command(InboundCommand(
                agent_id=payload["agent_id"], kind=payload["kind"],
                turn=payload.get("turn"), vertical=payload.get("vertical"),
                speed_cmd=payload.get("speed_cmd"), text=payload.get("text"),
                goal_kind=payload.get("goal_kind"),
                goal_runway=payload.get("goal_runway"),
            ))
        engine.tick()
        if all(a.status == AgentStatus.FINISHED for a in engine._sorted_agents()):
            break
    engine.record("end", {
        "reason": "all_finished"
        if all(a.status == AgentStatus.FINISHED for a in engine._sorted_agents())
        else "time_limit",
    })
    return engine.events
