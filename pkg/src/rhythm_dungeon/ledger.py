"""Append-only digest-chained ledger.

A chain is a value: appending returns a new chain and never touches
existing blocks.  Block digests are SHA-256 over the canonical encoding
of (height, prev_digest, timestamp, txs); files store one canonical JSON
block per line, so any single flipped byte is detectable by re-encoding.

There is no consensus here on purpose: one logical writer per chain,
any number of readers, and the contract state is always recomputed by
folding the transaction history through the genesis state machine.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import genesis
from .encoding import ZERO_DIGEST, canonical_bytes, digest_hex, is_digest

MAX_SUBMITTER_LEN = 64


class LedgerError(Exception):
    pass


class NonceReplay(LedgerError):
    pass


class ClockSkew(LedgerError):
    pass


class InvalidChain(LedgerError):
    pass


@dataclass(frozen=True)
class Transaction:
    kind: str
    payload: dict
    submitter: str
    nonce: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "payload": self.payload,
            "submitter": self.submitter,
            "nonce": self.nonce,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Transaction":
        if set(d) != {"kind", "payload", "submitter", "nonce"}:
            raise ValueError("transaction has wrong field set")
        return cls(kind=d["kind"], payload=d["payload"], submitter=d["submitter"], nonce=d["nonce"])


_PAYLOAD_SHAPES = {
    genesis.TX_UPLOAD_CHARACTER: {"character": dict, "origin_game": str},
    genesis.TX_RECORD_DARK_LORD_DEFEAT: {"chain_id": int, "defeat_index": int},
    genesis.TX_ACCUMULATE_ADAM_GROWTH: {"chain_id": int, "attribute": str},
    genesis.TX_BLOOD_MOON_RESULT: {"home_chain": int, "results": list},
}


def transaction_shape_ok(tx: Transaction) -> bool:
    """Structural check only; semantic validity is the contract's business."""
    if tx.kind not in _PAYLOAD_SHAPES:
        return False
    if not isinstance(tx.submitter, str) or len(tx.submitter) > MAX_SUBMITTER_LEN:
        return False
    if not isinstance(tx.nonce, int) or isinstance(tx.nonce, bool) or tx.nonce < 0:
        return False
    shape = _PAYLOAD_SHAPES[tx.kind]
    if not isinstance(tx.payload, dict) or set(tx.payload) != set(shape):
        return False
    for key, expected_type in shape.items():
        value = tx.payload[key]
        if isinstance(value, bool) or not isinstance(value, expected_type):
            return False
        if expected_type is int and value < 0:
            return False
    return True


@dataclass(frozen=True)
class Block:
    height: int
    prev_digest: str
    timestamp: int
    txs: tuple[Transaction, ...]
    digest: str

    def body_dict(self) -> dict:
        return {
            "height": self.height,
            "prev_digest": self.prev_digest,
            "timestamp": self.timestamp,
            "txs": [tx.to_dict() for tx in self.txs],
        }

    @classmethod
    def build(
        cls, height: int, prev_digest: str, timestamp: int, txs: Sequence[Transaction]
    ) -> "Block":
        body = {
            "height": height,
            "prev_digest": prev_digest,
            "timestamp": timestamp,
            "txs": [tx.to_dict() for tx in txs],
        }
        return cls(
            height=height,
            prev_digest=prev_digest,
            timestamp=timestamp,
            txs=tuple(txs),
            digest=digest_hex(body),
        )

    def to_dict(self) -> dict:
        d = self.body_dict()
        d["digest"] = self.digest
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Block":
        if set(d) != {"height", "prev_digest", "timestamp", "txs", "digest"}:
            raise ValueError("block has wrong field set")
        if not isinstance(d["txs"], list):
            raise ValueError("block txs must be a list")
        return cls(
            height=d["height"],
            prev_digest=d["prev_digest"],
            timestamp=d["timestamp"],
            txs=tuple(Transaction.from_dict(t) for t in d["txs"]),
            digest=d["digest"],
        )


@dataclass(frozen=True)
class Chain:
    chain_id: int
    blocks: tuple[Block, ...] = ()

    @property
    def tip(self) -> Optional[Block]:
        return self.blocks[-1] if self.blocks else None

    def transactions(self):
        for block in self.blocks:
            for tx in block.txs:
                yield block.height, tx


def next_nonce(chain: Chain, submitter: str) -> int:
    latest = -1
    for _, tx in chain.transactions():
        if tx.submitter == submitter and tx.nonce > latest:
            latest = tx.nonce
    return latest + 1


class ChainWriter:
    """The one logical writer a chain gets.

    Tracks the tip and the latest nonce per submitter incrementally, so a
    long simulation appends in time proportional to the batch instead of
    rescanning the whole history; the checks are the same ones
    verify_chain re-derives from scratch.
    """

    def __init__(self, chain: Chain):
        self.chain = chain
        self._latest_nonce: dict[str, int] = {}
        for _, tx in chain.transactions():
            if tx.nonce > self._latest_nonce.get(tx.submitter, -1):
                self._latest_nonce[tx.submitter] = tx.nonce

    def next_nonce(self, submitter: str) -> int:
        return self._latest_nonce.get(submitter, -1) + 1

    def append(self, txs: Sequence[Transaction], timestamp: int) -> Chain:
        tip = self.chain.tip
        if tip is not None and timestamp < tip.timestamp:
            raise ClockSkew(f"timestamp {timestamp} precedes tip {tip.timestamp}")
        if timestamp < 0:
            raise ClockSkew("timestamp must be non-negative")
        staged: dict[str, int] = {}
        for tx in txs:
            latest = staged.get(tx.submitter, self._latest_nonce.get(tx.submitter, -1))
            if tx.nonce <= latest:
                raise NonceReplay(
                    f"nonce {tx.nonce} for {tx.submitter!r} does not increase"
                )
            staged[tx.submitter] = tx.nonce
        block = Block.build(
            height=len(self.chain.blocks),
            prev_digest=tip.digest if tip is not None else ZERO_DIGEST,
            timestamp=timestamp,
            txs=txs,
        )
        self.chain = replace(self.chain, blocks=self.chain.blocks + (block,))
        self._latest_nonce.update(staged)
        return self.chain


def append_block(chain: Chain, txs: Sequence[Transaction], timestamp: int) -> Chain:
    """Functional append: returns a new chain one block longer."""
    return ChainWriter(chain).append(txs, timestamp)


def verify_chain(chain: Chain) -> bool:
    """True iff every structural invariant holds; never raises, never mutates."""
    prev_digest = ZERO_DIGEST
    prev_timestamp = 0
    latest_nonce: dict[str, int] = {}
    for height, block in enumerate(chain.blocks):
        if isinstance(block.height, bool) or block.height != height:
            return False
        if not isinstance(block.timestamp, int) or isinstance(block.timestamp, bool):
            return False
        if block.timestamp < 0 or (height > 0 and block.timestamp < prev_timestamp):
            return False
        if not is_digest(block.prev_digest) or block.prev_digest != prev_digest:
            return False
        if not is_digest(block.digest):
            return False
        try:
            if digest_hex(block.body_dict()) != block.digest:
                return False
        except ValueError:
            return False
        for tx in block.txs:
            if not transaction_shape_ok(tx):
                return False
            if tx.nonce <= latest_nonce.get(tx.submitter, -1):
                return False
            latest_nonce[tx.submitter] = tx.nonce
        prev_digest = block.digest
        prev_timestamp = block.timestamp
    return True


def replay(chain: Chain) -> genesis.GenesisState:
    """Fold the whole history into contract state; requires a valid chain."""
    return replay_receipts(chain)[0]


def replay_receipts(chain: Chain) -> tuple[genesis.GenesisState, list[dict]]:
    """Replay plus per-transaction bookkeeping.

    Each receipt records acceptance or the rejection reason, the character
    id assigned by an accepted upload, and whether a defeat tripped the
    Blood Moon threshold.  Receipts are derived, never stored: history is
    the chain itself.
    """
    if not verify_chain(chain):
        raise InvalidChain(f"chain {chain.chain_id} fails verification")
    state = genesis.register_chain(genesis.GenesisState.empty(), chain.chain_id)
    receipts: list[dict] = []
    for block in chain.blocks:
        for index, tx in enumerate(block.txs):
            chars_before = len(state.characters)
            defeats_before = dict(state.dark_lord_defeats)
            state, rejection = genesis.apply_transaction_checked(
                state, tx, block_height=block.height
            )
            receipt = {
                "height": block.height,
                "index": index,
                "kind": tx.kind,
                "submitter": tx.submitter,
                "rejected": rejection,
            }
            if tx.kind == genesis.TX_UPLOAD_CHARACTER and rejection is None:
                receipt["character_id"] = chars_before
            if tx.kind == genesis.TX_RECORD_DARK_LORD_DEFEAT and rejection is None:
                cid = tx.payload["chain_id"]
                after = state.dark_lord_defeats[cid]
                receipt["blood_moon_triggered"] = (
                    after != defeats_before.get(cid) and after % genesis.BLOOD_MOON_EVERY == 0
                )
            receipts.append(receipt)
    return state, receipts


def chain_filename(chain_id: int) -> str:
    return f"chain_{chain_id}.ndjson"


def save_chain(chain: Chain, path: str) -> None:
    with open(path, "wb") as fh:
        for block in chain.blocks:
            fh.write(canonical_bytes(block.to_dict()))
            fh.write(b"\n")


def load_chain(path: str, chain_id: Optional[int] = None) -> Chain:
    """Strict load: every line must byte-equal its canonical re-encoding."""
    import json as _json

    if chain_id is None:
        chain_id = _chain_id_from_path(path)
    blocks = []
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw and not raw.endswith(b"\n"):
        raise InvalidChain("chain file must end with a newline")
    for line_no, line in enumerate(raw.split(b"\n")[:-1] if raw else []):
        try:
            parsed = _json.loads(line.decode("utf-8"))
            block = Block.from_dict(parsed)
            if canonical_bytes(block.to_dict()) != line:
                raise ValueError("non-canonical block encoding")
        except (ValueError, TypeError, KeyError, UnicodeDecodeError) as exc:
            raise InvalidChain(f"line {line_no}: {exc}") from exc
        blocks.append(block)
    return Chain(chain_id=chain_id, blocks=tuple(blocks))


def _chain_id_from_path(path: str) -> int:
    import os
    import re

    match = re.fullmatch(r"chain_(\d+)\.ndjson", os.path.basename(path))
    return int(match.group(1)) if match else 0


def verify_chain_file(path: str) -> bool:
    """File-level tamper check: strict parse plus full chain verification."""
    try:
        chain = load_chain(path)
    except (InvalidChain, OSError):
        return False
    return verify_chain(chain)
