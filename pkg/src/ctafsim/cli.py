"""Command-line entry points.

    ctafsim run <scenario.json> [--out DIR] [--seed N]     headless run
    ctafsim serve <scenario.json> [--port P] [--timescale F] [--seed N]
    ctafsim replay <log.ndjson> [--port P] [--timescale F]  stream a log
    ctafsim metar "<metar text>" [--scenario FILE]          decode + runway
    ctafsim radio parse "<call text>"
    ctafsim radio gen --airfield X --callsign Y [...]

Exit codes: 0 clean, 2 scenario validation error, 3 engine invariant breach,
4 listen port busy.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import radio as radio_mod
from .engine import Engine, dump_events, trajectory_csv
from .geo import default_airfield, preferred_runway
from .metar import MalformedMetar, parse_metar
from .radio import IntentKind, PilotIntent, RadioCall, UnparseableCall
from .scenario import Scenario, ScenarioError, load_scenario

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_INVARIANT = 3
EXIT_PORT = 4


def _load(path: str, seed_override) -> Scenario:
    scenario = load_scenario(path)
    if seed_override is not None:
        raw = dict(scenario.raw)
        raw["seed"] = seed_override
        from .scenario import scenario_from_dict

        scenario = scenario_from_dict(raw)
    return scenario


def cmd_run(args) -> int:
    try:
        scenario = _load(args.scenario, args.seed)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    engine = Engine(scenario)
    try:
        events = engine.run()
    except (ValueError, AssertionError) as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "events.ndjson").write_text(dump_events(events))
    (out / "trajectories.csv").write_text(trajectory_csv(events, scenario.dt_s))
    stages = [e for e in events if e["kind"] == "stage"]
    for e in stages:
        print(f"stage {e['payload']['stage']} at t={e['t']}: {e['payload']['label']}")
    print(f"run complete: {engine.time_s:.0f} s simulated, "
          f"{len(events)} events -> {out}")
    return EXIT_OK


def _serve_app(app, port: int) -> int:
    import uvicorn

    try:
        uvicorn.run(app, host="0.0.0.0", port=port, log_level="warning")
    except SystemExit:
        return EXIT_PORT
    except OSError as exc:
        print(f"cannot listen on port {port}: {exc}", file=sys.stderr)
        return EXIT_PORT
    return EXIT_OK


def _static_dir() -> Path | None:
    for candidate in (
        Path(__file__).resolve().parents[2] / "frontend" / "dist",
        Path.cwd() / "frontend" / "dist",
    ):
        if candidate.is_dir():
            return candidate
    return None


def cmd_serve(args) -> int:
    try:
        scenario = _load(args.scenario, args.seed)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    from .server import SimServer, create_app

    server = SimServer(scenario, timescale=args.timescale, static_dir=_static_dir())
    app = create_app(server)
    print(f"serving {args.scenario} on http://0.0.0.0:{args.port} "
          f"(timescale x{server.timescale})")
    return _serve_app(app, args.port)


def cmd_replay(args) -> int:
    from .replay import LogReplayServer, create_replay_app

    path = Path(args.log)
    if not path.is_file():
        print(f"no such log: {path}", file=sys.stderr)
        return EXIT_SCENARIO
    server = LogReplayServer(path, timescale=args.timescale, static_dir=_static_dir())
    app = create_replay_app(server)
    print(f"replaying {path} on http://0.0.0.0:{args.port}")
    return _serve_app(app, args.port)


def cmd_metar(args) -> int:
    try:
        report = parse_metar(args.text)
    except MalformedMetar as exc:
        print(f"malformed METAR: {exc}", file=sys.stderr)
        return 1
    if args.scenario:
        try:
            airfield = _load(args.scenario, None).airfield
        except ScenarioError as exc:
            print(f"scenario error: {exc}", file=sys.stderr)
            return EXIT_SCENARIO
    else:
        airfield = default_airfield()
    rwy = preferred_runway(airfield, report.wind)
    direction = ("VRB" if report.wind.direction_deg is None
                 else f"{report.wind.direction_deg:03.0f}")
    gust = f" gusting {report.wind.gust_kt:.0f} kt" if report.wind.gust_kt else ""
    print(f"station {report.station}")
    print(f"wind {direction} @ {report.wind.speed_kt:.0f} kt{gust}")
    if report.visibility_sm is not None:
        print(f"visibility {report.visibility_sm:g} SM")
    print(f"preferred runway {rwy.designator} at {airfield.name}")
    return EXIT_OK


def cmd_radio_parse(args) -> int:
    try:
        call = radio_mod.parse_call(args.text)
    except UnparseableCall as exc:
        print(f"unparseable: {exc}")
        return 1
    print(json.dumps({
        "airfield": call.airfield_name,
        "callsign": call.callsign,
        "position": _position_dict(call),
        "intent": {"kind": call.intent.kind.value, "runway": call.intent.runway},
        "low_confidence": call.low_confidence,
    }, indent=2))
    return EXIT_OK


def _position_dict(call: RadioCall):
    if isinstance(call.position, radio_mod.LegReport):
        return {"leg": call.position.leg.value, "runway": call.position.runway}
    if isinstance(call.position, radio_mod.BearingReport):
        return {"distance_nm": call.position.distance_nm,
                "cardinal": call.position.cardinal}
    return None


def cmd_radio_gen(args) -> int:
    from .geo import PatternLeg

    position = None
    if args.leg:
        if not args.position_runway:
            print("--leg needs --position-runway", file=sys.stderr)
            return 1
        position = radio_mod.LegReport(PatternLeg(args.leg), args.position_runway)
    elif args.distance_nm is not None:
        if not args.cardinal:
            print("--distance-nm needs --cardinal", file=sys.stderr)
            return 1
        position = radio_mod.BearingReport(args.distance_nm, args.cardinal)
    call = RadioCall(
        airfield_name=args.airfield,
        callsign=args.callsign.upper(),
        position=position,
        intent=PilotIntent(IntentKind(args.intent), args.runway),
    )
    try:
        print(radio_mod.generate_call(call))
    except ValueError as exc:
        print(f"invalid call: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctafsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="headless scenario run")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default="logs")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(fn=cmd_run)

    p_serve = sub.add_parser("serve", help="interactive streaming server")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--port", type=int, default=8008)
    p_serve.add_argument("--timescale", type=float, default=1.0)
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.set_defaults(fn=cmd_serve)

    p_replay = sub.add_parser("replay", help="stream a recorded log")
    p_replay.add_argument("log")
    p_replay.add_argument("--port", type=int, default=8008)
    p_replay.add_argument("--timescale", type=float, default=1.0)
    p_replay.set_defaults(fn=cmd_replay)

    p_metar = sub.add_parser("metar", help="decode a METAR and pick the runway")
    p_metar.add_argument("text")
    p_metar.add_argument("--scenario", default=None)
    p_metar.set_defaults(fn=cmd_metar)

    p_radio = sub.add_parser("radio", help="phraseology tools")
    radio_sub = p_radio.add_subparsers(dest="radio_command", required=True)
    p_parse = radio_sub.add_parser("parse")
    p_parse.add_argument("text")
    p_parse.set_defaults(fn=cmd_radio_parse)
    p_gen = radio_sub.add_parser("gen")
    p_gen.add_argument("--airfield", required=True)
    p_gen.add_argument("--callsign", required=True)
    p_gen.add_argument("--leg", default=None)
    p_gen.add_argument("--position-runway", dest="position_runway", default=None)
    p_gen.add_argument("--distance-nm", dest="distance_nm", type=int, default=None)
    p_gen.add_argument("--cardinal", default=None)
    p_gen.add_argument("--intent", default="none")
    p_gen.add_argument("--runway", default=None)
    p_gen.set_defaults(fn=cmd_radio_gen)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
