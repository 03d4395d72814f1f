"""Stream a recorded event log back out as live-looking snapshots, so the
cockpit UI can review a finished run without re-simulating it."""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse

from .engine import load_events
from .server import AgentSnapshot, AiDebug, RadioEntry, Snapshot


def snapshots_from_log(events: list[dict]) -> list[Snapshot]:
    """Fold the per-tick state/radio/plan events into snapshot frames."""
    by_tick: dict[float, list[dict]] = {}
    for e in events:
        by_tick.setdefault(e["t"], []).append(e)

    radio_tail: list[RadioEntry] = []
    debug = AiDebug()
    frames: list[Snapshot] = []
    for t in sorted(by_tick):
        agents = []
        for e in by_tick[t]:
            kind = e["kind"]
            p = e["payload"]
            if kind == "state":
                agents.append(AgentSnapshot(
                    id=p["agent_id"], kind=p["kind"], status=p["status"],
                    x=p["x"], y=p["y"], z=p["z"],
                    heading_deg=p["heading_deg"], speed_mps=p["speed_mps"],
                ))
            elif kind == "radio":
                radio_tail.append(RadioEntry(
                    time_s=e["t"], agent_id=p["agent_id"], text=p["text"],
                ))
                radio_tail = radio_tail[-8:]
            elif kind == "plan":
                debug = AiDebug(
                    goal_runway=p["goal_runway"],
                    most_likely_branch=p.get("branch", []),
                    last_robustness=p.get("robustness"),
                    safety_modified=p.get("safety_modified", False),
                )
        if agents:
            finished = all(a.status == "finished" for a in agents)
            frames.append(Snapshot(
                time_s=t, agents=agents, radio_tail=list(radio_tail),
                ai_debug=debug, finished=finished,
            ))
    return frames


class LogReplayServer:
    def __init__(self, path: Path, timescale: float = 1.0,
                 static_dir: Optional[Path] = None):
        self.frames = snapshots_from_log(load_events(path.read_text()))
        if not self.frames:
            raise ValueError(f"log {path} holds no state events")
        self.timescale = max(0.1, min(10.0, timescale))
        self.static_dir = static_dir
        self.clients: list[asyncio.Queue] = []
        self.index = 0
        self._task: Optional[asyncio.Task] = None

    async def run(self) -> None:
        while True:
            await asyncio.sleep(1.0 / self.timescale)
            if self.index < len(self.frames):
                frame = self.frames[self.index]
                self.index += 1
                message = frame.model_dump_json()
                for q in list(self.clients):
                    try:
                        q.put_nowait(message)
                    except asyncio.QueueFull:
                        self.clients.remove(q)


def create_replay_app(server: LogReplayServer) -> FastAPI:
    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        server._task = asyncio.create_task(server.run())
        try:
            yield
        finally:
            server._task.cancel()

    app = FastAPI(title="ctafsim replay", lifespan=lifespan)

    @app.get("/", response_class=HTMLResponse)
    async def index():
        if server.static_dir is not None:
            page = server.static_dir / "index.html"
            if page.exists():
                return HTMLResponse(page.read_text())
        return HTMLResponse("<html><body><h1>ctafsim replay</h1></body></html>")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue(maxsize=64)
        server.clients.append(queue)
        bookmark = max(0, server.index - 1)
        try:
            await ws.send_text(json.dumps({"type": "hello", "agents": []}))
            if server.frames:
                await ws.send_text(server.frames[bookmark].model_dump_json())
            while True:
                message = await queue.get()
                await ws.send_text(message)
        except WebSocketDisconnect:
            pass
        finally:
            if queue in server.clients:
                server.clients.remove(queue)

    return app
