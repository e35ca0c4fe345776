"""Canonical JSON encoding and SHA-256 digests.

Everything that ends up on a chain (or is digested) is encoded as UTF-8
JSON with lexicographically sorted keys, no insignificant whitespace and
integer-only numbers, so equal values always produce equal bytes and
therefore equal digests, independent of who encoded them.
"""
from __future__ import annotations

import hashlib
import json
from typing import Any

ZERO_DIGEST = "0" * 64
_HEX_DIGITS = frozenset("0123456789abcdef")


def _reject_floats(value: Any) -> None:
    if isinstance(value, bool):
        return
    if isinstance(value, float):
        raise ValueError("floats are not canonical; use integers")
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise ValueError("object keys must be strings")
            _reject_floats(item)
    elif isinstance(value, (list, tuple)):
        for item in value:
            _reject_floats(item)


def canonical_json(value: Any) -> str:
    _reject_floats(value)
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(value: Any) -> bytes:
    return canonical_json(value).encode("utf-8")


def digest_hex(value: Any) -> str:
    """SHA-256 over the canonical encoding, as a lowercase hex string."""
    return hashlib.sha256(canonical_bytes(value)).hexdigest()


def is_digest(value: Any) -> bool:
    """Strict digest format: exactly 64 lowercase hex characters."""
    return (
        isinstance(value, str)
        and len(value) == 64
        and all(c in _HEX_DIGITS for c in value)
    )
