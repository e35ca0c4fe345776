"""Deterministic 64-bit generator (splitmix64).

Every draw in the system flows through this module so that battles,
enemy generation and bot behaviour replay bit-identically on any host.
Python's `random` is deliberately not used anywhere.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(state: int) -> tuple[int, int]:
    """Advance the generator once; returns (drawn value, next state)."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return (z ^ (z >> 31)), state


def derive_seed(base: int, *parts: int) -> int:
    """Stable sub-seed derivation.

    Folding indices (player, session, room, window, ...) into the base seed
    gives sibling streams that do not shift when an unrelated stream draws
    more or fewer values.
    """
    state = base & MASK64
    for part in parts:
        mixed = (state ^ ((part & MASK64) * _MIX1)) & MASK64
        state, _ = splitmix64(mixed)
    return state
