import json
import time

import pytest
from fastapi.testclient import TestClient

from ctafsim.scenario import scenario_from_dict
from ctafsim.server import SimServer, create_app


def serve_scenario(time_limit=60.0, with_human=True):
    agents = [
        {"id": "robot1", "kind": "ai", "x": -1100.0, "y": -1250.0, "z": 300.0,
         "heading_deg": 80.0, "speed_mps": 40.0, "goal": {"kind": "landing"}},
    ]
    if with_human:
        agents.append({
            "id": "pilot", "kind": "human", "x": 4000.0, "y": 4000.0, "z": 300.0,
            "heading_deg": 260.0, "speed_mps": 40.0,
        })
    raw = {
        "airfield": {
            "name": "butler",
            "runways": [
                {"designator": "08", "threshold_xyz": [-738.6, -130.2, 0.0],
                 "heading_deg": 80.0, "length_m": 1500.0},
                {"designator": "26", "threshold_xyz": [738.6, 130.2, 0.0],
                 "heading_deg": 260.0, "length_m": 1500.0},
            ],
            "pattern_altitude_m": 300.0,
            "pattern_width_m": 1000.0,
            "calm_wind_runway": "26",
        },
        "wind": {"direction_deg": 260.0, "speed_kt": 12.0},
        "dt_s": 1.0, "seed": 5, "time_limit_s": time_limit,
        "planner": {"iterations": 30},
        "limits": {"max_turn_rate_dps": 6.0},
        "agents": agents,
    }
    return scenario_from_dict(raw)


@pytest.fixture
def client():
    server = SimServer(serve_scenario(), timescale=10.0)
    app = create_app(server)
    with TestClient(app) as test_client:
        test_client.sim = server
        yield test_client


class TestRest:
    def test_metar_endpoint(self, client):
        resp = client.post("/api/metar", json={
            "text": "KBTP 121855Z 26012KT 10SM CLR 22/12 A3002"
        })
        body = resp.json()
        assert resp.status_code == 200
        assert body["wind_direction_deg"] == 260.0
        assert body["wind_speed_kt"] == 12.0
        assert body["preferred_runway"] == "26"

    def test_metar_malformed(self, client):
        resp = client.post("/api/metar", json={"text": "KBTP 121855Z 10SM"})
        assert resp.status_code == 422
        assert resp.json()["missing"] == "wind"

    def test_radio_parse_endpoint(self, client):
        resp = client.post("/api/radio/parse", json={
            "text": "butler traffic, cessna three two one, ten miles north, "
                    "inbound, landing runway zero eight, butler"
        })
        body = resp.json()
        assert body["ok"]
        assert body["callsign"] == "CESSNA321"
        assert body["intent_kind"] == "landing"
        assert body["runway"] == "08"

    def test_radio_parse_unparseable(self, client):
        resp = client.post("/api/radio/parse", json={"text": "hello"})
        assert not resp.json()["ok"]

    def test_radio_generate_endpoint(self, client):
        resp = client.post("/api/radio/generate", json={
            "airfield": "butler", "callsign": "N123",
            "leg": "base", "position_runway": "26",
            "intent_kind": "landing", "runway": "26",
        })
        body = resp.json()
        assert body["ok"]
        assert body["text"] == (
            "butler traffic, november one two three, base runway two six, "
            "landing runway two six, butler"
        )

    def test_radio_generate_invalid(self, client):
        resp = client.post("/api/radio/generate", json={
            "airfield": "butler", "callsign": "N123", "intent_kind": "landing",
        })
        assert resp.status_code == 422

    def test_scenario_endpoint(self, client):
        body = client.get("/api/scenario").json()
        assert body["airfield"] == "butler"
        assert {"id": "pilot", "kind": "human"} in body["agents"]

    def test_index_serves_html(self, client):
        resp = client.get("/")
        assert resp.status_code == 200
        assert "html" in resp.text.lower()


class TestWebSocket:
    def test_hello_then_full_snapshot(self, client):
        with client.websocket_connect("/ws") as ws:
            hello = json.loads(ws.receive_text())
            assert hello["type"] == "hello"
            assert hello["agents"] == ["pilot"]
            snap = json.loads(ws.receive_text())
            assert snap["type"] == "snapshot"
            assert {a["id"] for a in snap["agents"]} == {"pilot", "robot1"}

    def test_snapshots_advance_and_are_ordered(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()  # hello
            times = []
            for _ in range(5):
                msg = json.loads(ws.receive_text())
                if msg["type"] == "snapshot":
                    times.append(msg["time_s"])
            assert times == sorted(times)
            assert times[-1] > times[0]

    def test_pause_stops_time(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            ws.send_text(json.dumps({"type": "command", "kind": "pause",
                                     "client_seq": 1}))
            deadline = time.time() + 3.0
            while not client.sim.paused and time.time() < deadline:
                time.sleep(0.02)
            assert client.sim.paused
            frozen = client.sim.engine.time_s
            time.sleep(0.4)
            assert client.sim.engine.time_s == frozen
            ws.send_text(json.dumps({"type": "command", "kind": "resume",
                                     "client_seq": 2}))
            deadline = time.time() + 3.0
            while client.sim.engine.time_s == frozen and time.time() < deadline:
                time.sleep(0.02)
            assert client.sim.engine.time_s > frozen

    def test_control_claim_and_conflict(self, client):
        with client.websocket_connect("/ws") as first:
            first.receive_text()
            first.send_text(json.dumps({
                "type": "command", "kind": "control", "agent_id": "pilot",
                "client_seq": 1, "turn": "left",
            }))
            with client.websocket_connect("/ws") as second:
                hello = json.loads(second.receive_text())
                second.send_text(json.dumps({
                    "type": "command", "kind": "control", "agent_id": "pilot",
                    "client_seq": 1, "turn": "right",
                }))
                deadline = time.time() + 3.0
                reject = None
                while time.time() < deadline:
                    msg = json.loads(second.receive_text())
                    if msg["type"] == "reject":
                        reject = msg
                        break
                assert reject is not None
                assert "claimed" in reject["reason"]

    def test_radio_command_lands_in_tail(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            text = ("butler traffic, pilot, two miles north, inbound, "
                    "landing runway two six, butler")
            ws.send_text(json.dumps({
                "type": "command", "kind": "radio", "agent_id": "pilot",
                "client_seq": 1, "text": text,
            }))
            deadline = time.time() + 5.0
            seen = False
            while time.time() < deadline and not seen:
                msg = json.loads(ws.receive_text())
                if msg["type"] == "snapshot":
                    seen = any(entry["text"] == text for entry in msg["radio_tail"])
            assert seen

    def test_unparseable_radio_flagged(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            ws.send_text(json.dumps({
                "type": "command", "kind": "radio", "agent_id": "pilot",
                "client_seq": 1, "text": "hello there",
            }))
            deadline = time.time() + 3.0
            flagged = False
            while time.time() < deadline and not flagged:
                msg = json.loads(ws.receive_text())
                if msg["type"] == "reject" and msg["reason"] == "unparseable":
                    flagged = True
            assert flagged

    def test_duplicate_seq_discarded(self, client):
        server = client.sim
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            for _ in range(3):
                ws.send_text(json.dumps({
                    "type": "command", "kind": "radio", "agent_id": "pilot",
                    "client_seq": 7,
                    "text": "butler traffic, pilot, departing, butler",
                }))
            deadline = time.time() + 2.0
            while time.time() < deadline:
                time.sleep(0.05)
                commands = [e for e in server.engine.events if e["kind"] == "command"]
                if commands:
                    break
            time.sleep(0.3)
            commands = [e for e in server.engine.events if e["kind"] == "command"]
            assert len(commands) == 1


class TestReplayServer:
    def test_snapshots_from_log(self):
        from ctafsim.engine import run_scenario
        from ctafsim.replay import snapshots_from_log

        events = run_scenario(serve_scenario(time_limit=15.0, with_human=False))
        frames = snapshots_from_log(events)
        assert frames
        assert frames[0].agents[0].id == "robot1"
        times = [f.time_s for f in frames]
        assert times == sorted(times)
