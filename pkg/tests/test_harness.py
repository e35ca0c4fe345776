import pytest

from rhythm_dungeon import genesis, ledger
from rhythm_dungeon.genesis import GenesisState, register_chain
from rhythm_dungeon.harness import (
    ConfigInvalid,
    Scenario,
    load_scenario,
    metrics_from_chains,
    run_bot_dungeon,
    run_scenario,
    synth_trace,
    write_outputs,
)
from rhythm_dungeon.rhythm import BeatGrid, judge_window


def test_synth_trace_perfect_accuracy_lands_on_targets():
    grid = BeatGrid(bpm=120)
    intended = ("L", "L", "R", "R")
    trace = synth_trace(grid, 0, intended, 100, 0, seed=1)
    targets = [grid.beat_time_us(b) for b in grid.judged_beats(0)]
    assert [e.at_us for e in trace] == targets
    assert [e.button for e in trace] == list(intended)
    judged, tally = judge_window(grid, 0, intended, trace)
    assert [j.outcome for j in judged] == ["Hit"] * 4
    assert tally.total == 0


def test_synth_trace_small_jitter_still_all_hits():
    grid = BeatGrid(bpm=120)
    intended = ("D", "D", "D", "D")
    for seed in range(10):
        trace = synth_trace(grid, 2, intended, 100, grid.hit_window_us, seed)
        judged, _ = judge_window(grid, 2, intended, trace)
        assert [j.outcome for j in judged] == ["Hit"] * 4


def test_synth_trace_zero_accuracy_all_mistakes():
    grid = BeatGrid(bpm=100)
    intended = ("U", "D", "U", "D")
    for seed in range(10):
        trace = synth_trace(grid, 0, intended, 0, 5_000, seed)
        judged, tally = judge_window(grid, 0, intended, trace)
        assert all(j.outcome != "Hit" for j in judged)
        assert tally.total == 4


def test_synth_trace_deterministic():
    grid = BeatGrid(bpm=140)
    a = synth_trace(grid, 1, ("L", "L", "R", "R"), 60, 30_000, seed=99)
    b = synth_trace(grid, 1, ("L", "L", "R", "R"), 60, 30_000, seed=99)
    assert a == b


def test_scenario_validation():
    with pytest.raises(ConfigInvalid):
        Scenario(chains=0).validate()
    with pytest.raises(ConfigInvalid):
        Scenario(bot_accuracy_percent=101).validate()
    with pytest.raises(ConfigInvalid):
        Scenario(bot_jitter_us=-1).validate()
    Scenario().validate()


def test_scenario_toml_round_trip(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(
        "chains = 2\nplayers = 3\nsessions_per_player = 4\n"
        "bot_accuracy_percent = 80\nbot_jitter_us = 20000\n"
        "p_fetch_percent = 40\nmaster_seed = 99\n"
    )
    scenario = load_scenario(str(path))
    assert scenario == Scenario(
        chains=2, players=3, sessions_per_player=4, bot_accuracy_percent=80,
        bot_jitter_us=20000, p_fetch_percent=40, master_seed=99,
    )
    bad = tmp_path / "bad.toml"
    bad.write_text("chains = 1\nunknown_field = 5\n")
    with pytest.raises(ConfigInvalid):
        load_scenario(str(bad))


def test_minimal_scenario_uploads_and_reconciles():
    result = run_scenario(Scenario(master_seed=7))
    assert result.metrics.uploads_per_game.get("RhythmDungeon", 0) >= 1
    assert result.metrics.recomputable_dict() == metrics_from_chains(result.chains)
    for chain in result.chains:
        assert ledger.verify_chain(chain)


def test_scenario_outputs_byte_identical_across_runs(tmp_path):
    scenario = Scenario(
        chains=2, players=3, sessions_per_player=6, bot_accuracy_percent=75,
        bot_jitter_us=40_000, p_fetch_percent=60, master_seed=4242,
    )
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    write_outputs(run_scenario(scenario), str(out_a))
    write_outputs(run_scenario(scenario), str(out_b))
    for name in ("chain_0.ndjson", "chain_1.ndjson", "metrics.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_scenario_metrics_reconcile_on_mixed_run():
    scenario = Scenario(
        chains=2, players=4, sessions_per_player=6, bot_accuracy_percent=70,
        bot_jitter_us=30_000, p_fetch_percent=50, master_seed=11,
    )
    result = run_scenario(scenario)
    assert result.metrics.recomputable_dict() == metrics_from_chains(result.chains)
    # Uploads arrive from all three games in a six-session rotation.
    for game in ("RhythmDungeon", "LastTrip", "AdamsAdventure"):
        assert result.metrics.uploads_per_game.get(game, 0) >= 1


def test_bot_accuracy_monotonicity_over_seed_sweep():
    state = register_chain(GenesisState.empty(), 0)
    means = []
    for accuracy in (0, 25, 50, 75, 100):
        rooms = 0
        for seed in range(20):
            bot = run_bot_dungeon(state, "bot", seed, accuracy, 20_000, 0)
            rooms += bot.session.room_index
        means.append(rooms / 20)
    assert means == sorted(means), f"mean rooms by accuracy: {means}"
    assert means[0] == 0.0
    assert means[-1] > 0.0


def test_forced_defeats_trigger_exact_blood_moon_count():
    # Enough Adam's Adventure rotations to push chains past 30 defeats.
    scenario = Scenario(
        chains=2, players=6, sessions_per_player=36, bot_accuracy_percent=80,
        bot_jitter_us=20_000, p_fetch_percent=50, master_seed=20260810,
    )
    result = run_scenario(scenario)
    total_defeats = sum(result.metrics.dark_lord_defeats.values())
    assert total_defeats >= 30, f"only {total_defeats} defeats; scenario too small"
    for chain in result.chains:
        state, receipts = ledger.replay_receipts(chain)
        cid = chain.chain_id
        defeats = state.dark_lord_defeats[cid]
        moons_expected = defeats // genesis.BLOOD_MOON_EVERY
        moons_logged = len(state.blood_moon_log)
        triggers = sum(bool(r.get("blood_moon_triggered")) for r in receipts)
        assert moons_logged == moons_expected
        assert triggers == moons_expected
        assert result.metrics.blood_moons[cid] == moons_expected
