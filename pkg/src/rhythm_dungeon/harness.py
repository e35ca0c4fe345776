"""Scenario runner: synthetic players at controllable accuracy.

A scenario fans one master seed out into per-player, per-session and
per-window seeds, so any slice of the simulation can be reproduced in
isolation and the chain files it writes are byte-identical across runs.
Bots round-robin over the three games; every cross-game effect travels
through transactions committed to the per-chain ledgers.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

from . import characters as chars
from . import games, genesis, ledger, rhythm
from .rhythm import BeatGrid, InputEvent
from .rng import derive_seed, splitmix64

BOT_ROOM_CAP = 6
ADVENTURE_ROOM_CAP = 2
GAME_CYCLE = (
    games.ORIGIN_RHYTHM_DUNGEON,
    games.ORIGIN_LAST_TRIP,
    games.ORIGIN_ADAMS_ADVENTURE,
)
_LAST_TRIP_MENU = tuple(games.LAST_TRIP_CHOICES)

_TAG_TRACE = 11
_TAG_POLICY = 12
_TAG_DARK_LORD = 13
_TAG_BLOOD_MOON = 14


class ConfigInvalid(Exception):
    pass


@dataclass(frozen=True)
class Scenario:
    chains: int = 1
    players: int = 1
    sessions_per_player: int = 1
    bot_accuracy_percent: int = 100
    bot_jitter_us: int = 0
    p_fetch_percent: int = 50
    master_seed: int = 0

    def validate(self) -> None:
        if self.chains < 1 or self.players < 1 or self.sessions_per_player < 1:
            raise ConfigInvalid("counts must be at least 1")
        if not 0 <= self.bot_accuracy_percent <= 100:
            raise ConfigInvalid("bot_accuracy_percent must be 0..100")
        if not 0 <= self.p_fetch_percent <= 100:
            raise ConfigInvalid("p_fetch_percent must be 0..100")
        if self.bot_jitter_us < 0:
            raise ConfigInvalid("bot_jitter_us must be non-negative")


def load_scenario(path: str) -> Scenario:
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib  # type: ignore[no-redef]
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    known = {f.name for f in fields(Scenario)}
    unknown = set(data) - known
    if unknown:
        raise ConfigInvalid(f"unknown scenario fields: {sorted(unknown)}")
    for key, value in data.items():
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigInvalid(f"scenario field {key} must be an integer")
    scenario = Scenario(**data)
    scenario.validate()
    return scenario


def synth_trace(
    grid: BeatGrid,
    window_index: int,
    intended: Sequence[str],
    accuracy_percent: int,
    jitter_us: int,
    seed: int,
) -> tuple[InputEvent, ...]:
    """Synthesize one window of bot input.

    Per judged beat: with probability accuracy, the intended button with a
    uniform timing error inside +-jitter; otherwise one of three mistakes
    (skip, wrong button, or an out-of-hit-window timing offset), uniformly.
    """
    if not 0 <= accuracy_percent <= 100:
        raise ValueError("accuracy must be a percentage")
    if jitter_us < 0:
        raise ValueError("jitter must be non-negative")
    half = grid.beat_period_us // 2
    w_hit = grid.hit_window_us
    rng_state = seed
    events: list[InputEvent] = []
    for slot, beat in enumerate(grid.judged_beats(window_index)):
        target = grid.beat_time_us(beat)
        draw, rng_state = splitmix64(rng_state)
        if draw % 100 < accuracy_percent:
            offset = 0
            if jitter_us > 0:
                jit, rng_state = splitmix64(rng_state)
                offset = jit % (2 * jitter_us + 1) - jitter_us
            events.append(InputEvent(at_us=target + offset, button=intended[slot]))
            continue
        kind, rng_state = splitmix64(rng_state)
        kind %= 3
        if kind == 0:
            continue  # skipped beat
        if kind == 1:
            pick, rng_state = splitmix64(rng_state)
            others = [b for b in rhythm.BUTTONS if b != intended[slot]]
            wrong = others[pick % len(others)]
            bound = min(jitter_us, w_hit)
            offset = 0
            if bound > 0:
                jit, rng_state = splitmix64(rng_state)
                offset = jit % (2 * bound + 1) - bound
            events.append(InputEvent(at_us=target + offset, button=wrong))
            continue
        # Timing mistake: right button, magnitude in (w_hit .. half].
        mag, rng_state = splitmix64(rng_state)
        magnitude = w_hit + 1 + mag % (half - w_hit)
        sign_draw, rng_state = splitmix64(rng_state)
        sign = 1 if sign_draw % 2 == 0 else -1
        events.append(InputEvent(at_us=target + sign * magnitude, button=intended[slot]))
    events.sort(key=lambda e: e.at_us)
    return tuple(events)


@dataclass
class BotSessionResult:
    session: games.DungeonSession
    events: list[dict]
    spawns: int = 0
    fetched: int = 0


def _allocate_greedy(session: games.DungeonSession) -> games.DungeonSession:
    """Bots pour points into their career attribute, spilling over in
    career order once an attribute caps out."""
    character = session.character
    while character.unspent_skill_points > 0:
        favorite = games.career_attribute(character)
        order = [favorite] + [a for a in chars.ATTRIBUTES if a != favorite]
        for attr in order:
            try:
                character = chars.allocate_point(character, attr)
                break
            except chars.AttributeCap:
                continue
        else:
            break
    return replace(session, character=character)


def run_bot_dungeon(
    state: genesis.GenesisState,
    name: str,
    seed: int,
    accuracy_percent: int,
    jitter_us: int,
    p_fetch_percent: int,
    room_cap: int = BOT_ROOM_CAP,
) -> BotSessionResult:
    """Play one dungeon session with synthetic input until death or the
    room cap (then retire)."""
    session = games.new_dungeon_session(name, seed, p_fetch_percent=p_fetch_percent)
    result = BotSessionResult(session=session, events=[])
    while session.live:
        if session.phase == games.PHASE_EXPLORING:
            if session.room_index >= room_cap:
                session = games.retire(session)
                break
            session, events = games.step_dungeon(session, state)
            result.spawns += 1
            if events[0]["provenance"] == "Fetched":
                result.fetched += 1
        else:
            assert session.grid is not None and session.battle is not None
            trace = synth_trace(
                session.grid,
                session.window_index,
                session.cue,
                accuracy_percent,
                jitter_us,
                derive_seed(seed, session.room_index, session.window_index, _TAG_TRACE),
            )
            stance = session.battle.enemy.character.weakness
            session, events = games.step_dungeon(session, state, trace, stance)
            if any(e["type"] == "kill" for e in events):
                session = _allocate_greedy(session)
        result.events.extend(events)
    result.session = session
    return result


@dataclass
class Metrics:
    uploads_per_game: dict = field(default_factory=dict)
    dark_lord_defeats: dict = field(default_factory=dict)
    blood_moons: dict = field(default_factory=dict)
    adam_levels: dict = field(default_factory=dict)
    mistake_histogram: dict = field(default_factory=dict)
    spawns: int = 0
    fetched: int = 0
    transactions: int = 0
    sessions: int = 0

    @property
    def fetch_hit_rate(self) -> float:
        return self.fetched / self.spawns if self.spawns else 0.0

    def recomputable_dict(self) -> dict:
        """The slice of the metrics that is a pure function of the chains."""
        return {
            "uploads_per_game": {g: self.uploads_per_game.get(g, 0) for g in GAME_CYCLE},
            "dark_lord_defeats": {str(k): v for k, v in sorted(self.dark_lord_defeats.items())},
            "blood_moons": {str(k): v for k, v in sorted(self.blood_moons.items())},
            "adam_levels": {str(k): v for k, v in sorted(self.adam_levels.items())},
            "mistake_histogram": {
                w: self.mistake_histogram.get(w, 0) for w in chars.WEAKNESSES
            },
            "transactions": self.transactions,
        }

    def to_dict(self) -> dict:
        d = self.recomputable_dict()
        d["spawns"] = self.spawns
        d["fetched"] = self.fetched
        d["sessions"] = self.sessions
        return d


def metrics_from_chains(chains: Sequence[ledger.Chain]) -> dict:
    """Recount every chain-derivable metric from the ledgers alone."""
    metrics = Metrics()
    for chain in chains:
        state, receipts = ledger.replay_receipts(chain)
        metrics.transactions += len(receipts)
        for receipt, (_, tx) in zip(receipts, chain.transactions()):
            if receipt["rejected"] is not None:
                continue
            if tx.kind == genesis.TX_UPLOAD_CHARACTER:
                origin = tx.payload["origin_game"]
                metrics.uploads_per_game[origin] = metrics.uploads_per_game.get(origin, 0) + 1
                weakness = tx.payload["character"]["weakness"]
                metrics.mistake_histogram[weakness] = (
                    metrics.mistake_histogram.get(weakness, 0) + 1
                )
        cid = chain.chain_id
        metrics.dark_lord_defeats[cid] = state.dark_lord_defeats.get(cid, 0)
        metrics.blood_moons[cid] = state.dark_lord_defeats.get(cid, 0) // genesis.BLOOD_MOON_EVERY
        metrics.adam_levels[cid] = state.adam[cid].level
    return metrics.recomputable_dict()


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    chains: tuple[ledger.Chain, ...]
    metrics: Metrics


def run_scenario(scenario: Scenario) -> ScenarioResult:
    """Run every (player, session) slot in order; deterministic in the
    master seed.  All chains verify and replay cleanly afterwards."""
    scenario.validate()
    writers = {
        cid: ledger.ChainWriter(ledger.Chain(chain_id=cid))
        for cid in range(scenario.chains)
    }
    states = {
        cid: genesis.register_chain(genesis.GenesisState.empty(), cid)
        for cid in range(scenario.chains)
    }
    clock = 0
    metrics = Metrics()

    def take_nonce(submitter: str, cid: int) -> int:
        # Each submitter contributes at most one tx per pre-commit batch,
        # so the writer's committed view is the right nonce source.
        return writers[cid].next_nonce(submitter)

    def commit(cid: int, txs: Sequence[ledger.Transaction]) -> None:
        nonlocal clock
        if not txs:
            return
        chain = writers[cid].append(txs, clock)
        clock += 1
        height = chain.blocks[-1].height
        for tx in txs:
            states[cid] = genesis.apply_transaction(states[cid], tx, block_height=height)
        metrics.transactions += len(txs)

    for player in range(scenario.players):
        cid = player % scenario.chains
        submitter = f"player{player}"
        for slot in range(scenario.sessions_per_player):
            game = GAME_CYCLE[(player + slot) % len(GAME_CYCLE)]
            seed = derive_seed(scenario.master_seed, player, slot)
            name = f"p{player}s{slot}"
            metrics.sessions += 1
            if game == games.ORIGIN_RHYTHM_DUNGEON:
                bot = run_bot_dungeon(
                    states[cid],
                    name,
                    seed,
                    scenario.bot_accuracy_percent,
                    scenario.bot_jitter_us,
                    scenario.p_fetch_percent,
                )
                metrics.spawns += bot.spawns
                metrics.fetched += bot.fetched
                tx = games.finish_and_upload(bot.session, nonce=take_nonce(name, cid))
                commit(cid, [tx])
                _count_upload(metrics, tx)
            elif game == games.ORIGIN_LAST_TRIP:
                policy_seed = derive_seed(seed, _TAG_POLICY)
                policy = []
                rng_state = policy_seed
                for _ in range(games.LAST_TRIP_CHAPTERS):
                    draw, rng_state = splitmix64(rng_state)
                    policy.append(_LAST_TRIP_MENU[draw % len(_LAST_TRIP_MENU)])
                outcome = games.last_trip_run(
                    seed, policy, name=name, nonce=take_nonce(name, cid)
                )
                if outcome.transaction is not None:
                    commit(cid, [outcome.transaction])
                    _count_upload(metrics, outcome.transaction)
            else:
                bot = run_bot_dungeon(
                    states[cid],
                    name,
                    seed,
                    scenario.bot_accuracy_percent,
                    scenario.bot_jitter_us,
                    scenario.p_fetch_percent,
                    room_cap=ADVENTURE_ROOM_CAP,
                )
                metrics.spawns += bot.spawns
                metrics.fetched += bot.fetched
                adventure = games.AdventureSession(
                    character=bot.session.character,
                    mode=games.MODE_ADVENTURE,
                    chain_id=cid,
                )
                upload = games.finish_and_upload(
                    bot.session,
                    nonce=take_nonce(name, cid),
                    origin=games.ORIGIN_ADAMS_ADVENTURE,
                )
                growth = games.build_growth_transaction(
                    adventure.character, adventure.chain_id, submitter, take_nonce(submitter, cid)
                )
                commit(cid, [upload, growth])
                _count_upload(metrics, upload)
                if any(
                    r.origin_game == games.ORIGIN_LAST_TRIP and r.alive_in_store
                    for r in states[cid].characters
                ):
                    outcome = games.dark_lord_battle(
                        states[cid],
                        cid,
                        derive_seed(seed, _TAG_DARK_LORD),
                        submitter=submitter,
                        nonce=take_nonce(submitter, cid),
                    )
                    if outcome.victory:
                        commit(cid, list(outcome.transactions))
                        defeats = states[cid].dark_lord_defeats[cid]
                        if defeats % genesis.BLOOD_MOON_EVERY == 0:
                            moon = games.blood_moon(
                                states,
                                cid,
                                derive_seed(seed, _TAG_BLOOD_MOON),
                                submitter=submitter,
                                nonce=take_nonce(submitter, cid),
                            )
                            commit(cid, [moon.transaction])

    ordered = tuple(writers[cid].chain for cid in range(scenario.chains))
    for chain in ordered:
        if not ledger.verify_chain(chain):
            raise AssertionError(f"chain {chain.chain_id} failed verification")
        replayed = ledger.replay(chain)
        if genesis.state_digest(replayed) != genesis.state_digest(states[chain.chain_id]):
            raise AssertionError(f"chain {chain.chain_id} replay diverged from fold")
    for cid in range(scenario.chains):
        metrics.dark_lord_defeats[cid] = states[cid].dark_lord_defeats.get(cid, 0)
        metrics.blood_moons[cid] = (
            states[cid].dark_lord_defeats.get(cid, 0) // genesis.BLOOD_MOON_EVERY
        )
        metrics.adam_levels[cid] = states[cid].adam[cid].level
    return ScenarioResult(scenario=scenario, chains=ordered, metrics=metrics)


def _count_upload(metrics: Metrics, tx: ledger.Transaction) -> None:
    origin = tx.payload["origin_game"]
    metrics.uploads_per_game[origin] = metrics.uploads_per_game.get(origin, 0) + 1
    weakness = tx.payload["character"]["weakness"]
    metrics.mistake_histogram[weakness] = metrics.mistake_histogram.get(weakness, 0) + 1


def write_outputs(result: ScenarioResult, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for chain in result.chains:
        path = os.path.join(out_dir, ledger.chain_filename(chain.chain_id))
        ledger.save_chain(chain, path)
        written.append(path)
    metrics_path = os.path.join(out_dir, "metrics.json")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(result.metrics.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    written.append(metrics_path)
    return written
