import json

from rhythm_dungeon import games, genesis, ledger, rhythm
from rhythm_dungeon.cli import main
from rhythm_dungeon.encoding import canonical_json
from rhythm_dungeon.rhythm import trace_to_jsonable


def test_sim_run_writes_verifiable_outputs(tmp_path, capsys):
    scenario = tmp_path / "s.toml"
    scenario.write_text(
        "chains = 2\nplayers = 2\nsessions_per_player = 3\n"
        "bot_accuracy_percent = 80\nmaster_seed = 3\n"
    )
    out = tmp_path / "out"
    assert main(["sim", "run", str(scenario), "--out", str(out)]) == 0
    capsys.readouterr()
    for cid in (0, 1):
        chain_file = out / f"chain_{cid}.ndjson"
        assert chain_file.exists()
        assert main(["ledger", "verify", str(chain_file)]) == 0
        assert capsys.readouterr().out.strip() == "valid"
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["transactions"] >= 1


def test_ledger_verify_rejects_corruption(tmp_path, capsys):
    chain = ledger.append_block(ledger.Chain(chain_id=0), [], 0)
    path = tmp_path / "chain_0.ndjson"
    ledger.save_chain(chain, str(path))
    raw = bytearray(path.read_bytes())
    raw[5] ^= 0xFF
    path.write_bytes(bytes(raw))
    assert main(["ledger", "verify", str(path)]) == 1
    assert capsys.readouterr().out.strip() == "invalid"


def test_ledger_replay_prints_state_digest(tmp_path, capsys):
    chain = ledger.append_block(ledger.Chain(chain_id=0), [], 0)
    path = tmp_path / "chain_0.ndjson"
    ledger.save_chain(chain, str(path))
    assert main(["ledger", "replay", str(path)]) == 0
    digest = capsys.readouterr().out.strip()
    assert digest == genesis.state_digest(ledger.replay(chain))


def test_play_reproduces_in_process_session(tmp_path, capsys):
    # Drive a doomed session in-process with perfect echoes, then feed the
    # very same presses to `rd play` and expect the identical event log.
    state = genesis.register_chain(genesis.GenesisState.empty(), 0)
    session = games.new_dungeon_session(
        "audit", 4321, origin_ms=5000, p_fetch_percent=50, enemy_boost=(2, 30)
    )
    session, events = games.step_dungeon(session, state, spawn_origin_ms=5000)
    expected_events = list(events)
    all_inputs = []
    while session.phase == "InBattle":
        grid, cue = session.grid, session.cue
        inputs = tuple(
            rhythm.InputEvent(at_us=grid.beat_time_us(beat), button=cue[slot])
            for slot, beat in enumerate(grid.judged_beats(session.window_index))
        )
        all_inputs.extend(inputs)
        session, events = games.step_dungeon(session, state, inputs)
        expected_events.extend(events)
        if session.phase == "Exploring":
            session, events = games.step_dungeon(session, state)
            expected_events.extend(events)
    assert session.phase == "Dead"

    trace_path = tmp_path / "trace.json"
    trace_path.write_text(json.dumps(trace_to_jsonable(all_inputs)))
    assert (
        main(
            [
                "play",
                "--trace", str(trace_path),
                "--seed", "4321",
                "--name", "audit",
                "--origin-ms", "5000",
                "--boost-room", "2",
                "--boost-level", "30",
            ]
        )
        == 0
    )
    out_lines = [line for line in capsys.readouterr().out.splitlines() if line]
    assert out_lines == [canonical_json(e) for e in expected_events]


def test_play_retires_when_trace_runs_out(tmp_path, capsys):
    trace_path = tmp_path / "trace.json"
    trace_path.write_text("[]")
    assert main(["play", "--trace", str(trace_path), "--seed", "1"]) == 0
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines() if line]
    assert lines[0]["type"] == "spawn"
    assert lines[-1]["type"] == "retire"
