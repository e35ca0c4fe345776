"""Deterministic blockchain-game stack.

A replayable hash-chained ledger hosts the Genesis character contract;
three game engines (Rhythm Dungeon, Last Trip, Adam's Adventure) interact
with each other exclusively through the characters and counters stored
there.  Everything is integer arithmetic over seeded generators, so any
run can be reproduced bit for bit from its inputs.
"""
from .characters import Character, create_base, validate_character
from .combat import BattleState, Combatant, auto_battle, damage
from .games import DungeonSession, new_dungeon_session, step_dungeon
from .genesis import GenesisState, read_character, upload_character
from .harness import Scenario, run_scenario
from .ledger import Block, Chain, Transaction, append_block, replay, verify_chain
from .rhythm import BeatGrid, InputEvent, MistakeTally, judge_window

__all__ = [
    "BattleState",
    "BeatGrid",
    "Block",
    "Chain",
    "Character",
    "Combatant",
    "DungeonSession",
    "GenesisState",
    "InputEvent",
    "MistakeTally",
    "Scenario",
    "Transaction",
    "append_block",
    "auto_battle",
    "create_base",
    "damage",
    "judge_window",
    "new_dungeon_session",
    "read_character",
    "replay",
    "run_scenario",
    "step_dungeon",
    "upload_character",
    "validate_character",
]
