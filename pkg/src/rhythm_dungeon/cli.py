"""Command line entry point: `rd`.

Subcommands:
  rd sim run <scenario.toml>      run a scenario, write chains + metrics
  rd ledger verify <file>         check a chain file's integrity
  rd ledger replay <file>         replay a chain file, print the state digest
  rd play --trace <file>          run one deterministic session from a trace
  rd serve --port N --chain FILE  start the live-play HTTP service
"""
from __future__ import annotations

import argparse
import json
import sys

from . import games, genesis, harness, ledger, rhythm
from .encoding import canonical_json


def _cmd_sim_run(args: argparse.Namespace) -> int:
    scenario = harness.load_scenario(args.scenario)
    result = harness.run_scenario(scenario)
    written = harness.write_outputs(result, args.out)
    for path in written:
        print(path)
    return 0


def _cmd_ledger_verify(args: argparse.Namespace) -> int:
    ok = ledger.verify_chain_file(args.file)
    print("valid" if ok else "invalid")
    return 0 if ok else 1


def _cmd_ledger_replay(args: argparse.Namespace) -> int:
    chain = ledger.load_chain(args.file)
    state = ledger.replay(chain)
    print(genesis.state_digest(state))
    return 0


def _cmd_play(args: argparse.Namespace) -> int:
    """Drive one session from a trace file; prints one event per line.

    The run is fully determined by (seed, origin, chain snapshot, trace),
    which makes this the offline audit tool for served sessions.
    """
    trace = rhythm.load_trace(args.trace)
    if args.chain:
        state = ledger.replay(ledger.load_chain(args.chain))
    else:
        state = genesis.register_chain(genesis.GenesisState.empty(), 0)
    boost = None
    if args.boost_level is not None:
        boost = (args.boost_room, args.boost_level)
    session = games.new_dungeon_session(
        args.name,
        args.seed,
        origin_ms=args.origin_ms,
        p_fetch_percent=args.p_fetch,
        enemy_boost=boost,
    )
    events: list[dict] = []
    session, evs = games.step_dungeon(session, state, spawn_origin_ms=args.origin_ms)
    events.extend(evs)
    last_at = trace[-1].at_us if trace else None
    while session.phase == games.PHASE_IN_BATTLE:
        grid = session.grid
        assert grid is not None
        lo = grid.window_start_us(session.window_index)
        hi = grid.window_deadline_us(session.window_index)
        window_inputs = tuple(e for e in trace if lo <= e.at_us <= hi)
        if not window_inputs and (last_at is None or lo > last_at):
            session = games.retire(session)
            events.append({"type": "retire", "room": session.room_index})
            break
        session, evs = games.step_dungeon(session, state, window_inputs, args.stance)
        events.extend(evs)
        if session.phase == games.PHASE_EXPLORING:
            session, evs = games.step_dungeon(session, state)
            events.extend(evs)
    for event in events:
        print(canonical_json(event))
    tx = games.finish_and_upload(session)
    print(f"phase={session.phase} rooms={session.room_index}", file=sys.stderr)
    print(f"upload={canonical_json(tx.to_dict())}", file=sys.stderr)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import os

    import uvicorn

    from .service import create_app

    if os.path.exists(args.chain):
        chain = ledger.load_chain(args.chain)
    else:
        chain = ledger.Chain(chain_id=0)
        ledger.save_chain(chain, args.chain)
    ui_dir = args.ui if args.ui and os.path.isdir(args.ui) else None
    app = create_app(
        chain=chain, chain_path=args.chain, master_seed=args.seed, ui_dir=ui_dir
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="scenario simulation")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    sim_run = sim_sub.add_parser("run", help="run a scenario file")
    sim_run.add_argument("scenario")
    sim_run.add_argument("--out", default="out")
    sim_run.set_defaults(func=_cmd_sim_run)

    led = sub.add_parser("ledger", help="chain file tools")
    led_sub = led.add_subparsers(dest="ledger_command", required=True)
    led_verify = led_sub.add_parser("verify")
    led_verify.add_argument("file")
    led_verify.set_defaults(func=_cmd_ledger_verify)
    led_replay = led_sub.add_parser("replay")
    led_replay.add_argument("file")
    led_replay.set_defaults(func=_cmd_ledger_replay)

    play = sub.add_parser("play", help="deterministic session from a trace")
    play.add_argument("--trace", required=True)
    play.add_argument("--seed", type=int, default=0)
    play.add_argument("--name", default="player")
    play.add_argument("--origin-ms", type=int, default=0)
    play.add_argument("--chain", default=None)
    play.add_argument("--p-fetch", type=int, default=50)
    play.add_argument("--stance", default="None")
    play.add_argument("--boost-room", type=int, default=0)
    play.add_argument("--boost-level", type=int, default=None)
    play.set_defaults(func=_cmd_play)

    serve = sub.add_parser("serve", help="live-play HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--chain", required=True)
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--ui", default="frontend/dist")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        harness.ConfigInvalid,
        ledger.LedgerError,
        games.GameError,
        FileNotFoundError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
