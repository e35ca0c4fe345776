"""The three game flows over the shared contract.

Rhythm Dungeon sessions are the full loop: spawn an enemy (procedurally or
fetched from the contract store), echo the cued press pattern window by
window, resolve combat, and upload the character once the run ends.  Last
Trip is a ten-chapter storybook that grows a character and fights one
final battle.  Adam's Adventure accumulates growth into the per-chain Adam
and drives the Dark Lord / Blood Moon modes.

Every cross-game effect flows through transactions; sessions only ever
read a contract state snapshot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from . import characters as chars
from . import combat, genesis, ledger, rhythm
from .characters import Character
from .combat import BattleState, Combatant
from .rhythm import BeatGrid, InputEvent, MistakeTally
from .rng import derive_seed, splitmix64

ORIGIN_RHYTHM_DUNGEON = "RhythmDungeon"
ORIGIN_LAST_TRIP = "LastTrip"
ORIGIN_ADAMS_ADVENTURE = "AdamsAdventure"

PHASE_EXPLORING = "Exploring"
PHASE_IN_BATTLE = "InBattle"
PHASE_DEAD = "Dead"
PHASE_RETIRED = "Retired"

MODE_ADVENTURE = "BattleOfAdventure"
MODE_DARK_LORD = "BattleOfDarkLord"
MODE_BLOOD_MOON = "BattleOfBloodMoon"

XP_PER_ENEMY_LEVEL = 10
DARK_LORD_BASE_LEVEL = 5
DARK_LORD_LEVEL_EVERY = 5
LAST_TRIP_CHAPTERS = 10

# The cue bar announces one of the three known patterns; battles cycle
# charge -> attack -> dodge so every pattern stays in rotation.
CUE_CYCLE = (
    rhythm.PATTERN_OF_ACTION[rhythm.ACTION_CHARGE],
    rhythm.PATTERN_OF_ACTION[rhythm.ACTION_ATTACK],
    rhythm.PATTERN_OF_ACTION[rhythm.ACTION_DODGE],
)

LAST_TRIP_CHOICES = {
    "Train": "strength",
    "Fortify": "armor",
    "Explore": "luck",
    "Rest": "vitality",
}

ENEMY_NAMES = (
    "Bone Rattler",
    "Gloom Wisp",
    "Mire Shade",
    "Fen Howler",
    "Rust Ghoul",
    "Pit Crawler",
    "Dust Wraith",
    "Marrow Fiend",
)
DARK_LORD_NAME = "Dark Lord"

# Sub-stream tags so sibling draws never shift each other.
_TAG_SPAWN = 1
_TAG_BATTLE = 2
_TAG_DUEL = 3
_TAG_FINAL = 4


class GameError(Exception):
    pass


class SessionOver(GameError):
    pass


class SessionActive(GameError):
    pass


class BadPolicy(GameError):
    pass


class NoSummon(GameError):
    pass


class NotTriggered(GameError):
    pass


def career_attribute(character: Character) -> str:
    return chars.ATTRIBUTE_OF_CAREER[character.career]


def procedural_character(name: str, level: int, seed: int) -> Character:
    """Level-appropriate character with points spread round-robin from a
    seeded starting attribute.

    Valid under the contract rules whenever the level is within the
    contract's cap; system bosses (the Dark Lord) may exceed it, which is
    fine because they are fought, never uploaded."""
    draw, _ = splitmix64(seed)
    start = draw % len(chars.ATTRIBUTES)
    values = dict(chars.BASE_ATTRIBUTES)
    for i in range(chars.POINTS_PER_LEVEL * (level - 1)):
        attr = chars.ATTRIBUTES[(start + i) % len(chars.ATTRIBUTES)]
        values[attr] += 1
    return Character(name=name, level=level, **values)


def generate_enemy(
    state: genesis.GenesisState,
    player_level: int,
    seed: int,
    p_fetch_percent: int,
) -> tuple[Combatant, tuple[str, Optional[int]]]:
    """Either fetch a level-matched character from the contract store or
    generate one procedurally; provenance says which happened."""
    if player_level < 1:
        raise ValueError("player level must be positive")
    if not 0 <= p_fetch_percent <= 100:
        raise ValueError("fetch probability must be a percentage")
    draw, rng_state = splitmix64(seed)
    if draw % 100 < p_fetch_percent:
        fetch_draw, rng_state = splitmix64(rng_state)
        fetched = genesis.read_character(state, player_level, fetch_draw)
        if fetched is not None:
            cid, record = fetched
            return Combatant.fresh(record.character), ("Fetched", cid)
    name_draw, rng_state = splitmix64(rng_state)
    name = ENEMY_NAMES[name_draw % len(ENEMY_NAMES)]
    enemy = procedural_character(name, player_level, rng_state)
    return Combatant.fresh(enemy), ("Procedural", None)


@dataclass(frozen=True)
class DungeonSession:
    player: str
    character: Character
    seed: int
    room_index: int = 0
    phase: str = PHASE_EXPLORING
    battle: Optional[BattleState] = None
    grid: Optional[BeatGrid] = None
    window_index: int = 0
    cue: Optional[tuple[str, ...]] = None
    tally: MistakeTally = MistakeTally()
    p_fetch_percent: int = 50
    next_origin_ms: int = 0
    enemy_boost: Optional[tuple[int, int]] = None  # (from room, enemy level)

    @property
    def live(self) -> bool:
        return self.phase in (PHASE_EXPLORING, PHASE_IN_BATTLE)


def new_dungeon_session(
    player: str,
    seed: int,
    origin_ms: int = 0,
    p_fetch_percent: int = 50,
    enemy_boost: Optional[tuple[int, int]] = None,
) -> DungeonSession:
    return DungeonSession(
        player=player,
        character=chars.create_base(player),
        seed=seed,
        next_origin_ms=origin_ms,
        p_fetch_percent=p_fetch_percent,
        enemy_boost=tuple(enemy_boost) if enemy_boost else None,
    )


def _spawn(
    session: DungeonSession,
    state: genesis.GenesisState,
    spawn_origin_ms: Optional[int],
) -> tuple[DungeonSession, tuple[dict, ...]]:
    enemy_level = session.character.level
    if session.enemy_boost is not None and session.room_index >= session.enemy_boost[0]:
        enemy_level = max(enemy_level, session.enemy_boost[1])
    enemy, provenance = generate_enemy(
        state,
        enemy_level,
        derive_seed(session.seed, session.room_index, _TAG_SPAWN),
        session.p_fetch_percent,
    )
    bpm = rhythm.tempo_for_tier(enemy.character.level)
    origin_ms = session.next_origin_ms if spawn_origin_ms is None else spawn_origin_ms
    grid = BeatGrid(bpm=bpm, origin_ms=origin_ms)
    battle = BattleState(
        player=Combatant.fresh(session.character),
        enemy=enemy,
        rng_state=derive_seed(session.seed, session.room_index, _TAG_BATTLE),
    )
    session = replace(
        session,
        phase=PHASE_IN_BATTLE,
        battle=battle,
        grid=grid,
        window_index=0,
        cue=CUE_CYCLE[0],
        next_origin_ms=origin_ms,
    )
    event = {
        "type": "spawn",
        "room": session.room_index,
        "enemy_name": enemy.character.name,
        "enemy_level": enemy.character.level,
        "provenance": provenance[0],
        "character_id": provenance[1],
        "bpm": bpm,
        "origin_ms": origin_ms,
    }
    return session, (event,)


def _play_window(
    session: DungeonSession,
    window_inputs: Sequence[InputEvent],
    stance: str,
) -> tuple[DungeonSession, tuple[dict, ...]]:
    grid, battle, cue = session.grid, session.battle, session.cue
    assert grid is not None and battle is not None and cue is not None
    judged, delta = rhythm.judge_window(grid, session.window_index, cue, window_inputs)
    tally = session.tally.merge(delta)
    action = rhythm.decode_action(judged, cue)
    if battle.player.stance != stance:
        battle = replace(battle, player=replace(battle.player, stance=stance))
    battle, effects = combat.resolve_round(battle, action)

    events = [
        {
            "type": "window",
            "room": session.room_index,
            "window_index": session.window_index,
            "bpm": grid.bpm,
            "expected": list(cue),
            "stance": stance,
            "inputs": rhythm.trace_to_jsonable(window_inputs),
            "judgements": [j.to_dict() for j in judged],
            "action": action,
            "effects": list(effects),
            "player_health": battle.player.current_health,
            "enemy_health": battle.enemy.current_health,
            "tally": tally.to_dict(),
        }
    ]
    session = replace(session, battle=battle, tally=tally)

    if not battle.enemy.alive:
        xp = XP_PER_ENEMY_LEVEL * battle.enemy.character.level
        character = chars.grant_xp(session.character, xp)
        # Music keeps flowing: the next battle picks up where this window ended.
        end_us = grid.window_end_us(session.window_index)
        session = replace(
            session,
            character=character,
            room_index=session.room_index + 1,
            phase=PHASE_EXPLORING,
            battle=None,
            cue=None,
            window_index=0,
            next_origin_ms=-(-end_us // 1000),
        )
        events.append(
            {
                "type": "kill",
                "room": session.room_index - 1,
                "xp": xp,
                "level": character.level,
                "unspent_skill_points": character.unspent_skill_points,
            }
        )
    elif not battle.player.alive:
        session = replace(session, phase=PHASE_DEAD)
        events.append({"type": "death", "room": session.room_index})
    else:
        next_index = session.window_index + 1
        session = replace(
            session,
            window_index=next_index,
            cue=CUE_CYCLE[next_index % len(CUE_CYCLE)],
        )
    return session, tuple(events)


def step_dungeon(
    session: DungeonSession,
    state: genesis.GenesisState,
    window_inputs: Sequence[InputEvent] = (),
    stance: str = "None",
    spawn_origin_ms: Optional[int] = None,
) -> tuple[DungeonSession, tuple[dict, ...]]:
    """Advance the session one step.

    Exploring steps spawn the next enemy (inputs are ignored); in-battle
    steps judge one window and resolve its action.  Dead and Retired are
    terminal: the character is never playable again.
    """
    if session.phase == PHASE_EXPLORING:
        return _spawn(session, state, spawn_origin_ms)
    if session.phase == PHASE_IN_BATTLE:
        return _play_window(session, window_inputs, stance)
    raise SessionOver(f"session is {session.phase}")


def retire(session: DungeonSession) -> DungeonSession:
    if not session.live:
        raise SessionOver(f"session is {session.phase}")
    return replace(session, phase=PHASE_RETIRED, battle=None, cue=None)


def allocate_in_session(session: DungeonSession, attribute: str) -> DungeonSession:
    """Spend a skill point mid-run; an active battle sees the new attributes."""
    if not session.live:
        raise SessionOver(f"session is {session.phase}")
    character = chars.allocate_point(session.character, attribute)
    battle = session.battle
    if battle is not None:
        battle = replace(battle, player=replace(battle.player, character=character))
    return replace(session, character=character, battle=battle)


def finish_and_upload(
    session: DungeonSession,
    nonce: int = 0,
    origin: str = ORIGIN_RHYTHM_DUNGEON,
) -> ledger.Transaction:
    """Stamp the session's most frequent mistake as the character's weakness
    and emit the upload transaction.  Only finished sessions may upload."""
    if session.live:
        raise SessionActive("session is still playable")
    character = replace(
        session.character, weakness=rhythm.weakness_from_tally(session.tally)
    )
    return ledger.Transaction(
        kind=genesis.TX_UPLOAD_CHARACTER,
        payload={
            "character": chars.to_canonical_dict(character),
            "origin_game": origin,
        },
        submitter=session.player,
        nonce=nonce,
    )


def run_recorded_steps(
    session: DungeonSession,
    state: genesis.GenesisState,
    steps: Sequence[dict],
) -> tuple[DungeonSession, list[dict]]:
    """Re-run a recorded step list (the service's per-session journal).

    Replaying the same steps against the same snapshot reproduces the
    event log bit for bit; this is the offline audit path.
    """
    events: list[dict] = []
    for step in steps:
        if "allocate" in step:
            session = allocate_in_session(session, step["allocate"])
            events.append({"type": "allocate", "attribute": step["allocate"]})
            continue
        if step.get("retire"):
            session = retire(session)
            events.append({"type": "retire", "room": session.room_index})
            continue
        session, evs = step_dungeon(
            session,
            state,
            rhythm.trace_from_jsonable(step.get("inputs", [])),
            step.get("stance", "None"),
            step.get("spawn_origin_ms"),
        )
        events.extend(evs)
    return session, events


# --- Last Trip -------------------------------------------------------------


@dataclass(frozen=True)
class LastTripSession:
    character: Character
    chapter: int = 0
    phase: str = "Choosing"


@dataclass(frozen=True)
class LastTripOutcome:
    session: LastTripSession
    won: bool
    turns: int
    transaction: Optional[ledger.Transaction]


def last_trip_run(
    seed: int,
    policy: Sequence[str],
    name: str = "Traveler",
    nonce: int = 0,
) -> LastTripOutcome:
    """Ten storybook chapters, each growing one attribute, then one final
    battle; winners get uploaded for the other games to meet."""
    if len(policy) != LAST_TRIP_CHAPTERS or any(c not in LAST_TRIP_CHOICES for c in policy):
        raise BadPolicy(f"policy must be {LAST_TRIP_CHAPTERS} known choices")
    character = chars.create_base(name)
    session = LastTripSession(character=character)
    for choice in policy:
        attr = LAST_TRIP_CHOICES[choice]
        character = replace(character, **{attr: character.attribute(attr) + 1})
        session = LastTripSession(character=character, chapter=session.chapter + 1)
    # Earned points imply the level; the leftover of the 3-per-level grant
    # stays unspent so the budget identity holds exactly.
    extra = character.attribute_sum - chars.BASE_ATTRIBUTE_SUM
    level = 1 + math.ceil(extra / chars.POINTS_PER_LEVEL)
    unspent = chars.POINTS_PER_LEVEL * (level - 1) - extra
    character = replace(character, level=level, unspent_skill_points=unspent)

    enemy = procedural_character(
        ENEMY_NAMES[splitmix64(derive_seed(seed, _TAG_FINAL))[0] % len(ENEMY_NAMES)],
        character.level,
        derive_seed(seed, _TAG_SPAWN),
    )
    result = combat.auto_battle_full(
        Combatant.fresh(character),
        Combatant.fresh(enemy),
        derive_seed(seed, _TAG_BATTLE),
    )
    won = result.winner == "a"
    session = LastTripSession(
        character=character,
        chapter=LAST_TRIP_CHAPTERS,
        phase="Won" if won else "Lost",
    )
    transaction = None
    if won:
        transaction = ledger.Transaction(
            kind=genesis.TX_UPLOAD_CHARACTER,
            payload={
                "character": chars.to_canonical_dict(character),
                "origin_game": ORIGIN_LAST_TRIP,
            },
            submitter=name,
            nonce=nonce,
        )
    return LastTripOutcome(
        session=session, won=won, turns=result.turns, transaction=transaction
    )


# --- Adam's Adventure ------------------------------------------------------


@dataclass(frozen=True)
class AdventureSession:
    character: Character
    mode: str
    chain_id: int


def build_growth_transaction(
    character: Character, chain_id: int, submitter: str, nonce: int = 0
) -> ledger.Transaction:
    """A finished adventure folds one point of its career attribute into Adam."""
    return ledger.Transaction(
        kind=genesis.TX_ACCUMULATE_ADAM_GROWTH,
        payload={"chain_id": chain_id, "attribute": career_attribute(character)},
        submitter=submitter,
        nonce=nonce,
    )


@dataclass(frozen=True)
class DarkLordOutcome:
    victory: bool
    dark_lord_level: int
    summon_id: int
    duels: tuple[dict, ...]
    transactions: tuple[ledger.Transaction, ...]


def _summon_last_trip(
    state: genesis.GenesisState, adam_level: int, seed: int
) -> tuple[int, genesis.CharacterRecord]:
    records = [
        (cid, record)
        for cid, record in enumerate(state.characters)
        if record.origin_game == ORIGIN_LAST_TRIP and record.alive_in_store
    ]
    if not records:
        raise NoSummon("no Last Trip characters stored")
    matched = [
        (cid, record)
        for cid, record in records
        if abs(record.character.level - adam_level) <= 1
    ]
    if matched:
        draw, _ = splitmix64(seed)
        return matched[draw % len(matched)]
    return min(records, key=lambda item: (abs(item[1].character.level - adam_level), item[0]))


def dark_lord_battle(
    state: genesis.GenesisState,
    chain_id: int,
    seed: int,
    submitter: str = "system",
    nonce: int = 0,
) -> DarkLordOutcome:
    """Adam plus one summoned Last Trip character duel the Dark Lord in
    sequence; his health persists between duels.  Victory records a defeat,
    which may in turn trigger the Blood Moon at replay time."""
    if chain_id not in state.adam:
        raise genesis.UnknownChain(f"chain {chain_id} is not registered")
    adam = state.adam[chain_id]
    summon_id, summon = _summon_last_trip(state, adam.level, derive_seed(seed, _TAG_SPAWN))
    defeats = state.dark_lord_defeats[chain_id]
    dark_lord_level = DARK_LORD_BASE_LEVEL + defeats // DARK_LORD_LEVEL_EVERY
    dark_lord = Combatant.fresh(
        procedural_character(DARK_LORD_NAME, dark_lord_level, derive_seed(seed, _TAG_BATTLE))
    )
    duels = []
    for index, (label, member) in enumerate(
        (("adam", adam), (f"summon:{summon_id}", summon.character))
    ):
        if not dark_lord.alive:
            break
        result = combat.auto_battle_full(
            Combatant.fresh(member), dark_lord, derive_seed(seed, _TAG_DUEL, index)
        )
        dark_lord = result.b
        duels.append(
            {
                "member": label,
                "winner": result.winner,
                "turns": result.turns,
                "dark_lord_health": dark_lord.current_health,
            }
        )
    victory = not dark_lord.alive
    transactions: tuple[ledger.Transaction, ...] = ()
    if victory:
        transactions = (
            ledger.Transaction(
                kind=genesis.TX_RECORD_DARK_LORD_DEFEAT,
                payload={"chain_id": chain_id, "defeat_index": defeats},
                submitter=submitter,
                nonce=nonce,
            ),
        )
    return DarkLordOutcome(
        victory=victory,
        dark_lord_level=dark_lord_level,
        summon_id=summon_id,
        duels=tuple(duels),
        transactions=transactions,
    )


@dataclass(frozen=True)
class BloodMoonOutcome:
    results: tuple[dict, ...]
    transaction: ledger.Transaction


def blood_moon(
    states: Mapping[int, genesis.GenesisState],
    home_chain: int,
    seed: int,
    submitter: str = "system",
    nonce: int = 0,
) -> BloodMoonOutcome:
    """The home chain's Adam duels every other chain's Adam in ascending
    chain order, fully healed between duels."""
    if home_chain not in states:
        raise genesis.UnknownChain(f"chain {home_chain} is not registered")
    home_state = states[home_chain]
    counter = home_state.dark_lord_defeats.get(home_chain)
    if counter is None:
        raise genesis.UnknownChain(f"chain {home_chain} is not registered")
    if counter == 0 or counter % genesis.BLOOD_MOON_EVERY != 0:
        raise NotTriggered(f"chain {home_chain} has {counter} defeats")
    home_adam = home_state.adam[home_chain]
    results = []
    for index, opponent_chain in enumerate(sorted(cid for cid in states if cid != home_chain)):
        opponent_adam = states[opponent_chain].adam[opponent_chain]
        winner, turns = combat.auto_battle(
            Combatant.fresh(home_adam),
            Combatant.fresh(opponent_adam),
            derive_seed(seed, _TAG_DUEL, index),
        )
        results.append(
            {
                "opponent_chain": opponent_chain,
                "winner": "home" if winner == "a" else "opponent",
                "turns": turns,
            }
        )
    transaction = ledger.Transaction(
        kind=genesis.TX_BLOOD_MOON_RESULT,
        payload={"home_chain": home_chain, "results": results},
        submitter=submitter,
        nonce=nonce,
    )
    return BloodMoonOutcome(results=tuple(results), transaction=transaction)
