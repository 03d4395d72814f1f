"""Streaming service: paces the engine in wall-clock time, fans world
snapshots out to websocket clients, and feeds cockpit commands back in.

One pacing task owns the engine. Each connection gets a bounded outbound
queue; a consumer that falls behind is dropped rather than stalling the
engine. The first client to command a human-flown aircraft claims it until
disconnect; everyone else observes. The same protocol serves recorded logs
for replay.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from pydantic import BaseModel, Field

from . import radio as radio_mod
from .engine import AgentKind, AgentStatus, Engine, InboundCommand
from .geo import classify_leg, preferred_runway
from .metar import MalformedMetar, parse_metar
from .radio import IntentKind, PilotIntent, RadioCall, UnparseableCall
from .scenario import Scenario

RADIO_TAIL_LENGTH = 8
TIMESCALE_MIN, TIMESCALE_MAX = 0.1, 10.0


class AgentSnapshot(BaseModel):
    id: str
    kind: str
    x: float
    y: float
    z: float
    heading_deg: float
    speed_mps: float
    status: str
    current_leg: Optional[str] = None


class RadioEntry(BaseModel):
    time_s: float
    agent_id: str
    text: str


class AiDebug(BaseModel):
    goal_runway: Optional[str] = None
    most_likely_branch: list[list[float]] = Field(default_factory=list)
    last_robustness: Optional[float] = None
    safety_modified: bool = False


class Snapshot(BaseModel):
    type: str = "snapshot"
    time_s: float
    paused: bool = False
    finished: bool = False
    agents: list[AgentSnapshot] = Field(default_factory=list)
    radio_tail: list[RadioEntry] = Field(default_factory=list)
    ai_debug: AiDebug = Field(default_factory=AiDebug)


class ClientCommand(BaseModel):
    type: str = "command"
    kind: str
    agent_id: Optional[str] = None
    client_seq: int = 0
    turn: Optional[str] = None
    vertical: Optional[str] = None
    speed_cmd: Optional[str] = None
    text: Optional[str] = None
    intent_kind: Optional[str] = None
    runway: Optional[str] = None
    factor: Optional[float] = None


def snapshot_of(engine: Engine, paused: bool = False) -> Snapshot:
    agents = []
    for agent in (engine.agents[k] for k in sorted(engine.agents)):
        st = agent.state
        leg = None
        runway_id = agent.goal.runway
        if runway_id is None:
            runway_id = preferred_runway(engine.airfield, engine.wind).designator
        leg_val = classify_leg(
            engine.airfield, engine.airfield.runway(runway_id),
            st.position, st.heading_deg,
        )
        if leg_val is not None:
            leg = leg_val.value
        agents.append(AgentSnapshot(
            id=agent.id, kind=agent.kind,
            x=round(st.position.x, 2), y=round(st.position.y, 2),
            z=round(st.position.z, 2),
            heading_deg=round(st.heading_deg, 2),
            speed_mps=round(st.speed_mps, 2),
            status=agent.status, current_leg=leg,
        ))
    tail = [
        RadioEntry(time_s=t, agent_id=a, text=txt)
        for t, a, txt in engine.radio_tail[-RADIO_TAIL_LENGTH:]
    ]
    debug = AiDebug()
    for agent in (engine.agents[k] for k in sorted(engine.agents)):
        if agent.kind == AgentKind.AI and agent.plan is not None:
            debug = AiDebug(
                goal_runway=agent.plan.goal_runway,
                most_likely_branch=[
                    [round(p.x, 1), round(p.y, 1), round(p.z, 1)]
                    for p in agent.plan.most_likely_branch
                ],
                last_robustness=round(agent.plan.robustness, 3),
                safety_modified=agent.plan.safety_modified,
            )
            break
    finished = all(
        a.status == AgentStatus.FINISHED for a in engine.agents.values()
    )
    return Snapshot(
        time_s=engine.time_s, paused=paused, finished=finished,
        agents=agents, radio_tail=tail, ai_debug=debug,
    )


class _Client:
    def __init__(self, ws: WebSocket):
        self.ws = ws
        self.queue: asyncio.Queue[str] = asyncio.Queue(maxsize=64)
        self.last_seq = -1


class SimServer:
    """Shared state behind the FastAPI app."""

    def __init__(self, scenario: Scenario, timescale: float = 1.0,
                 static_dir: Optional[Path] = None):
        self.engine = Engine(scenario)
        self.scenario = scenario
        self.timescale = max(TIMESCALE_MIN, min(TIMESCALE_MAX, timescale))
        self.paused = False
        self.static_dir = static_dir
        self.clients: list[_Client] = []
        self.claims: dict[str, _Client] = {}
        self.latest = snapshot_of(self.engine)
        self._pacer: Optional[asyncio.Task] = None

    # -- engine pacing -------------------------------------------------------

    async def run(self) -> None:
        while True:
            await asyncio.sleep(self.engine.dt / self.timescale)
            if self.paused:
                continue
            if self.engine.time_s >= self.scenario.time_limit_s:
                continue
            if all(a.status == AgentStatus.FINISHED
                   for a in self.engine.agents.values()):
                continue
            self.engine.tick()
            self.latest = snapshot_of(self.engine, self.paused)
            self._fanout(self.latest)

    def _fanout(self, snapshot: Snapshot) -> None:
        message = snapshot.model_dump_json()
        for client in list(self.clients):
            try:
                client.queue.put_nowait(message)
            except asyncio.QueueFull:
                self._drop(client)

    def _drop(self, client: _Client) -> None:
        if client in self.clients:
            self.clients.remove(client)
        for agent_id, owner in list(self.claims.items()):
            if owner is client:
                del self.claims[agent_id]

    # -- commands ---------------------------------------------------------------

    def claimable_agents(self) -> list[str]:
        return [
            a.id for a in self.engine.agents.values()
            if a.kind == AgentKind.HUMAN and a.id not in self.claims
        ]

    def handle_command(self, client: _Client, cmd: ClientCommand) -> Optional[str]:
        """Apply a command; returns a rejection reason or None."""
        if cmd.client_seq <= client.last_seq:
            return None  # duplicate: already applied, silently discard
        client.last_seq = cmd.client_seq

        if cmd.kind == "pause":
            self.paused = True
            self.latest = snapshot_of(self.engine, True)
            self._fanout(self.latest)
            return None
        if cmd.kind == "resume":
            self.paused = False
            return None
        if cmd.kind == "timescale":
            if cmd.factor is None:
                return "timescale needs a factor"
            self.timescale = max(TIMESCALE_MIN, min(TIMESCALE_MAX, cmd.factor))
            return None

        agent = self.engine.agents.get(cmd.agent_id or "")
        if agent is None:
            return f"unknown agent {cmd.agent_id!r}"
        if agent.kind != AgentKind.HUMAN:
            return f"agent {agent.id} is not human-flyable"
        owner = self.claims.get(agent.id)
        if owner is None:
            self.claims[agent.id] = client
        elif owner is not client:
            return f"agent {agent.id} already claimed"

        if cmd.kind == "control":
            self.engine.submit_command(InboundCommand(
                agent_id=agent.id, kind="control",
                turn=cmd.turn, vertical=cmd.vertical, speed_cmd=cmd.speed_cmd,
            ))
            return None
        if cmd.kind == "radio":
            if not cmd.text:
                return "radio command needs text"
            self.engine.submit_command(InboundCommand(
                agent_id=agent.id, kind="radio", text=cmd.text,
            ))
            try:
                radio_mod.parse_call(cmd.text)
            except UnparseableCall:
                return "unparseable"
            return None
        if cmd.kind == "intent":
            if not cmd.intent_kind:
                return "intent command needs intent_kind"
            self.engine.submit_command(InboundCommand(
                agent_id=agent.id, kind="intent",
                goal_kind=cmd.intent_kind, goal_runway=cmd.runway,
            ))
            return None
        return f"unknown command kind {cmd.kind!r}"


# REST bodies -----------------------------------------------------------------


class RadioParseRequest(BaseModel):
    text: str


class RadioParseResponse(BaseModel):
    ok: bool
    callsign: Optional[str] = None
    airfield: Optional[str] = None
    position: Optional[str] = None
    intent_kind: str = "none"
    runway: Optional[str] = None
    low_confidence: bool = False
    error: Optional[str] = None


class RadioGenerateRequest(BaseModel):
    airfield: str
    callsign: str
    leg: Optional[str] = None
    position_runway: Optional[str] = None
    distance_nm: Optional[int] = None
    cardinal: Optional[str] = None
    intent_kind: str = "none"
    runway: Optional[str] = None


class MetarRequest(BaseModel):
    text: str


def describe_position(call: RadioCall) -> Optional[str]:
    if isinstance(call.position, radio_mod.LegReport):
        return f"{call.position.leg.value} runway {call.position.runway}"
    if isinstance(call.position, radio_mod.BearingReport):
        return f"{call.position.distance_nm} nm {call.position.cardinal}"
    return None


def create_app(server: SimServer) -> FastAPI:
    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        server._pacer = asyncio.create_task(server.run())
        try:
            yield
        finally:
            server._pacer.cancel()

    app = FastAPI(title="ctafsim", version="0.1.0", lifespan=lifespan)
    app.state.sim = server

    @app.get("/", response_class=HTMLResponse)
    async def index():
        if server.static_dir is not None:
            page = server.static_dir / "index.html"
            if page.exists():
                return HTMLResponse(page.read_text())
        return HTMLResponse(
            "<html><body><h1>ctafsim</h1>"
            "<p>No cockpit bundle found. Connect to <code>/ws</code> "
            "for the snapshot stream.</p></body></html>"
        )

    @app.get("/static/{path:path}")
    async def static_file(path: str):
        if server.static_dir is None:
            return JSONResponse({"error": "no static bundle"}, status_code=404)
        target = (server.static_dir / path).resolve()
        if not str(target).startswith(str(server.static_dir.resolve())) \
                or not target.is_file():
            return JSONResponse({"error": "not found"}, status_code=404)
        return FileResponse(target)

    @app.post("/api/radio/parse", response_model=RadioParseResponse)
    async def api_radio_parse(req: RadioParseRequest):
        try:
            call = radio_mod.parse_call(req.text)
        except UnparseableCall as exc:
            return RadioParseResponse(ok=False, error=str(exc))
        return RadioParseResponse(
            ok=True, callsign=call.callsign or None,
            airfield=call.airfield_name,
            position=describe_position(call),
            intent_kind=call.intent.kind.value, runway=call.intent.runway,
            low_confidence=call.low_confidence,
        )

    @app.post("/api/radio/generate")
    async def api_radio_generate(req: RadioGenerateRequest):
        position = None
        if req.leg is not None and req.position_runway is not None:
            from .geo import PatternLeg
            position = radio_mod.LegReport(PatternLeg(req.leg), req.position_runway)
        elif req.distance_nm is not None and req.cardinal is not None:
            position = radio_mod.BearingReport(req.distance_nm, req.cardinal)
        call = RadioCall(
            airfield_name=req.airfield,
            callsign=req.callsign.upper(),
            position=position,
            intent=PilotIntent(IntentKind(req.intent_kind), req.runway),
        )
        try:
            return {"ok": True, "text": radio_mod.generate_call(call)}
        except ValueError as exc:
            return JSONResponse({"ok": False, "error": str(exc)}, status_code=422)

    @app.post("/api/metar")
    async def api_metar(req: MetarRequest):
        try:
            report = parse_metar(req.text)
        except MalformedMetar as exc:
            return JSONResponse(
                {"ok": False, "error": str(exc), "missing": exc.missing_field},
                status_code=422,
            )
        rwy = preferred_runway(server.engine.airfield, report.wind)
        return {
            "ok": True,
            "station": report.station,
            "wind_direction_deg": report.wind.direction_deg,
            "wind_speed_kt": report.wind.speed_kt,
            "gust_kt": report.wind.gust_kt,
            "visibility_sm": report.visibility_sm,
            "preferred_runway": rwy.designator,
        }

    @app.get("/api/scenario")
    async def api_scenario():
        return {
            "airfield": server.engine.airfield.name,
            "runways": [r.designator for r in server.engine.airfield.runways],
            "agents": [
                {"id": a.id, "kind": a.kind}
                for a in server.engine.agents.values()
            ],
            "dt_s": server.engine.dt,
        }

    @app.get("/api/map")
    async def api_map():
        from .geo import pattern_waypoints

        airfield = server.engine.airfield
        return {
            "airfield": airfield.name,
            "pattern_altitude_m": airfield.pattern_altitude_m,
            "d_safe_m": server.scenario.safety_config.d_safe_m,
            "runways": [
                {
                    "designator": r.designator,
                    "threshold": [r.threshold.x, r.threshold.y],
                    "heading_deg": r.heading_deg,
                    "length_m": r.length_m,
                    "pattern": [
                        [round(p.x, 1), round(p.y, 1)]
                        for p in pattern_waypoints(airfield, r)
                    ],
                }
                for r in airfield.runways
            ],
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        client = _Client(ws)
        server.clients.append(client)
        writer = asyncio.create_task(_writer_loop(client))
        try:
            await ws.send_text(json.dumps(
                {"type": "hello", "agents": server.claimable_agents()}
            ))
            await ws.send_text(server.latest.model_dump_json())
            while True:
                raw = await ws.receive_text()
                try:
                    cmd = ClientCommand.model_validate_json(raw)
                except ValueError:
                    await ws.send_text(json.dumps(
                        {"type": "reject", "seq": -1, "reason": "malformed command"}
                    ))
                    continue
                reason = server.handle_command(client, cmd)
                if reason is not None:
                    await ws.send_text(json.dumps(
                        {"type": "reject", "seq": cmd.client_seq, "reason": reason}
                    ))
        except WebSocketDisconnect:
            pass
        finally:
            writer.cancel()
            server._drop(client)

    async def _writer_loop(client: _Client) -> None:
        try:
            while True:
                message = await client.queue.get()
                await client.ws.send_text(message)
        except Exception:
            server._drop(client)

    return app
