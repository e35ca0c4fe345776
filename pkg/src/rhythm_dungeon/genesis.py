"""The Genesis contract: a deterministic state machine over transactions.

State holds the shared character store, one Adam (the communal hero) and
one Dark Lord defeat counter per registered chain, and a log of Blood Moon
results.  All operations are functional; the only mutation path in the
system is appending transactions to a chain and folding them back through
apply_transaction.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from . import characters as chars
from .characters import Character
from .encoding import canonical_json, digest_hex

BLOOD_MOON_EVERY = 30
ADAM_NAME = "Adam"

TX_UPLOAD_CHARACTER = "UploadCharacter"
TX_RECORD_DARK_LORD_DEFEAT = "RecordDarkLordDefeat"
TX_ACCUMULATE_ADAM_GROWTH = "AccumulateAdamGrowth"
TX_BLOOD_MOON_RESULT = "BloodMoonResult"
TX_KINDS = (
    TX_UPLOAD_CHARACTER,
    TX_RECORD_DARK_LORD_DEFEAT,
    TX_ACCUMULATE_ADAM_GROWTH,
    TX_BLOOD_MOON_RESULT,
)


class GenesisError(Exception):
    pass


class InvalidCharacter(GenesisError):
    def __init__(self, rule: str):
        super().__init__(f"character violates rule {rule}")
        self.rule = rule


class UnknownChain(GenesisError):
    pass


@dataclass(frozen=True)
class CharacterRecord:
    character: Character
    origin_game: str
    uploaded_at: int = 0
    alive_in_store: bool = True

    def to_dict(self) -> dict:
        return {
            "character": chars.to_canonical_dict(self.character),
            "origin_game": self.origin_game,
            "uploaded_at": self.uploaded_at,
            "alive_in_store": self.alive_in_store,
        }


@dataclass(frozen=True)
class GenesisState:
    characters: tuple[CharacterRecord, ...] = ()
    adam: Mapping[int, Character] = field(default_factory=dict)
    dark_lord_defeats: Mapping[int, int] = field(default_factory=dict)
    blood_moon_log: tuple[dict, ...] = ()

    @classmethod
    def empty(cls) -> "GenesisState":
        return cls()


def register_chain(state: GenesisState, chain_id: int) -> GenesisState:
    """Make a chain known: its Adam starts as the base character, counter 0."""
    if chain_id in state.adam:
        return state
    adam = dict(state.adam)
    adam[chain_id] = chars.create_base(ADAM_NAME)
    defeats = dict(state.dark_lord_defeats)
    defeats[chain_id] = 0
    return replace(state, adam=adam, dark_lord_defeats=defeats)


def upload_character(
    state: GenesisState,
    character: Character,
    origin_game: str,
    uploaded_at: int = 0,
) -> tuple[GenesisState, int]:
    """Store a character if it passes validation; returns the assigned id."""
    if origin_game not in chars.GAMES:
        raise ValueError(f"unknown origin game {origin_game!r}")
    valid, rule = chars.validate_character(character)
    if not valid:
        raise InvalidCharacter(rule or "unknown")
    record = CharacterRecord(
        character=character, origin_game=origin_game, uploaded_at=uploaded_at
    )
    new_id = len(state.characters)
    return replace(state, characters=state.characters + (record,)), new_id


def read_character(
    state: GenesisState,
    player_level: int,
    rng_seed: int,
    exclude_origin: Optional[str] = None,
) -> Optional[tuple[int, CharacterRecord]]:
    """Fetch one stored character within one level of the player.

    Candidates are ordered by id and one is picked as seed mod count, so
    identical inputs always return the identical record.  Returns the
    (character_id, record) pair, or None when nothing matches.
    """
    if player_level < 1:
        raise ValueError("player level must be positive")
    candidates = [
        (cid, record)
        for cid, record in enumerate(state.characters)
        if record.alive_in_store
        and abs(record.character.level - player_level) <= 1
        and (exclude_origin is None or record.origin_game != exclude_origin)
    ]
    if not candidates:
        return None
    return candidates[rng_seed % len(candidates)]


def record_dark_lord_defeat(state: GenesisState, chain_id: int) -> tuple[GenesisState, bool]:
    """Bump the chain's defeat counter; every 30th defeat triggers a Blood Moon."""
    if chain_id not in state.dark_lord_defeats:
        raise UnknownChain(f"chain {chain_id} is not registered")
    defeats = dict(state.dark_lord_defeats)
    defeats[chain_id] += 1
    triggered = defeats[chain_id] % BLOOD_MOON_EVERY == 0
    return replace(state, dark_lord_defeats=defeats), triggered


def adam_level_for_sum(attribute_sum: int) -> int:
    return 1 + (attribute_sum - chars.BASE_ATTRIBUTE_SUM) // chars.POINTS_PER_LEVEL


def accumulate_adam_growth(
    state: GenesisState, chain_id: int, career_attribute: str
) -> GenesisState:
    """Fold one point of a finished character's growth into the chain's Adam.

    Adam's level tracks his attribute sum (one level per three accumulated
    points) so his power scales with the community's play.
    """
    if chain_id not in state.adam:
        raise UnknownChain(f"chain {chain_id} is not registered")
    if career_attribute not in chars.ATTRIBUTES:
        raise ValueError(f"unknown attribute {career_attribute!r}")
    adam = state.adam[chain_id]
    grown = replace(adam, **{career_attribute: adam.attribute(career_attribute) + 1})
    grown = replace(grown, level=adam_level_for_sum(grown.attribute_sum))
    new_adams = dict(state.adam)
    new_adams[chain_id] = grown
    return replace(state, adam=new_adams)


def _apply_upload(state: GenesisState, payload: dict, block_height: int) -> tuple[GenesisState, Optional[str]]:
    if set(payload) != {"character", "origin_game"}:
        return state, "malformed payload"
    if payload["origin_game"] not in chars.GAMES:
        return state, "unknown origin game"
    try:
        character = chars.from_canonical_dict(payload["character"])
    except (ValueError, TypeError, KeyError):
        return state, "malformed character"
    try:
        state, _ = upload_character(
            state, character, payload["origin_game"], uploaded_at=block_height
        )
    except InvalidCharacter as exc:
        return state, exc.rule
    return state, None


def apply_transaction_checked(
    state: GenesisState, tx, block_height: int = 0
) -> tuple[GenesisState, Optional[str]]:
    """Dispatch one transaction; rejected transactions are folded as no-ops.

    Returns (state, rejection reason or None).  Never raises: history must
    replay all the way through even when individual entries were bad.
    """
    kind, payload = tx.kind, tx.payload
    if kind == TX_UPLOAD_CHARACTER:
        return _apply_upload(state, payload, block_height)
    if kind == TX_RECORD_DARK_LORD_DEFEAT:
        if set(payload) != {"chain_id", "defeat_index"}:
            return state, "malformed payload"
        try:
            state, _ = record_dark_lord_defeat(state, payload["chain_id"])
        except UnknownChain:
            return state, "unknown chain"
        return state, None
    if kind == TX_ACCUMULATE_ADAM_GROWTH:
        if set(payload) != {"chain_id", "attribute"}:
            return state, "malformed payload"
        try:
            state = accumulate_adam_growth(state, payload["chain_id"], payload["attribute"])
        except (UnknownChain, ValueError):
            return state, "unknown chain or attribute"
        return state, None
    if kind == TX_BLOOD_MOON_RESULT:
        if set(payload) != {"home_chain", "results"} or not isinstance(payload["results"], list):
            return state, "malformed payload"
        return replace(state, blood_moon_log=state.blood_moon_log + (payload,)), None
    return state, f"unknown transaction kind {kind!r}"


def apply_transaction(state: GenesisState, tx, block_height: int = 0) -> GenesisState:
    return apply_transaction_checked(state, tx, block_height)[0]


def state_to_dict(state: GenesisState) -> dict:
    """Full public snapshot; anyone can serialize and inspect the contract."""
    return {
        "characters": [record.to_dict() for record in state.characters],
        "adam": {
            str(cid): chars.to_canonical_dict(adam)
            for cid, adam in sorted(state.adam.items())
        },
        "dark_lord_defeats": {
            str(cid): count for cid, count in sorted(state.dark_lord_defeats.items())
        },
        "blood_moon_log": list(state.blood_moon_log),
    }


def state_canonical_json(state: GenesisState) -> str:
    return canonical_json(state_to_dict(state))


def state_digest(state: GenesisState) -> str:
    return digest_hex(state_to_dict(state))
