"""Live-play gateway: session lifecycle, window ingestion, ledger browsing.

The server is the only judge: clients submit timestamped inputs and render
whatever comes back.  Every step is journalled so a finished session can be
replayed offline through the same engine and must reproduce the event log
exactly.  Ledger browsing is credential-free by design.
"""
from __future__ import annotations

import asyncio
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from fastapi import Body, FastAPI, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import Response

from . import characters as chars
from . import games, genesis, ledger, rhythm
from .encoding import canonical_json


class CanonicalJSONResponse(Response):
    media_type = "application/json"

    def render(self, content: Any) -> bytes:
        return canonical_json(content).encode("utf-8")


def _error(status: int, name: str, detail: str = "") -> CanonicalJSONResponse:
    return CanonicalJSONResponse({"error": name, "detail": detail}, status_code=status)


@dataclass
class LiveSession:
    session_id: str
    dungeon: games.DungeonSession
    snapshot: genesis.GenesisState
    origin_ms: int
    offset_us: int = 0
    steps: list = field(default_factory=list)
    events: list = field(default_factory=list)
    last_events: list = field(default_factory=list)
    version: int = 0

    def bump(self) -> None:
        self.version += 1


class ServiceStore:
    """Shared mutable state behind one lock; chain appends are serialized."""

    def __init__(
        self,
        chain: ledger.Chain,
        chain_path: Optional[str] = None,
        master_seed: int = 0,
        now_us: Optional[Callable[[], int]] = None,
    ):
        self.lock = threading.RLock()
        self.chain = chain
        self.chain_path = chain_path
        self.master_seed = master_seed
        self.now_us = now_us or (lambda: time.time_ns() // 1000)
        self.state = ledger.replay(chain)
        self.sessions: dict[str, LiveSession] = {}
        self._counter = 0

    def new_session_id(self) -> str:
        self._counter += 1
        return f"s{self._counter:04d}"

    def default_seed(self) -> int:
        return self.master_seed + self._counter + 1


def _character_view(character: chars.Character) -> dict:
    view = chars.to_canonical_dict(character)
    view["career"] = character.career
    view["max_health"] = character.max_health
    return view


def _session_view(live: LiveSession) -> dict:
    session = live.dungeon
    view: dict[str, Any] = {
        "session_id": live.session_id,
        "player": session.player,
        "phase": session.phase,
        "room_index": session.room_index,
        "seed": session.seed,
        "origin_ms": live.origin_ms,
        "character": _character_view(session.character),
        "tally": session.tally.to_dict(),
        "battle": None,
        "window": None,
        "last_events": live.last_events,
    }
    battle, grid = session.battle, session.grid
    if battle is not None and grid is not None:
        view["battle"] = {
            "player_health": battle.player.current_health,
            "player_charged": battle.player.charged,
            "player_dodging": battle.player.dodging,
            "enemy": _character_view(battle.enemy.character),
            "enemy_health": battle.enemy.current_health,
        }
        w = session.window_index
        view["window"] = {
            "window_index": w,
            "bpm": grid.bpm,
            "start_us": grid.window_start_us(w),
            "deadline_us": grid.window_deadline_us(w),
            "expected": list(session.cue or ()),
            "beat_times_us": [grid.beat_time_us(b) for b in grid.judged_beats(w)],
            "cue_times_us": [
                grid.beat_time_us(b) for b in list(grid.window_beats(w))[: rhythm.BEATS_PER_BAR]
            ],
        }
    return view


def _advance_spawns(live: LiveSession, state: genesis.GenesisState) -> list[dict]:
    """Keep the session sitting on a pending window (or a terminal phase)."""
    events: list[dict] = []
    while live.dungeon.phase == games.PHASE_EXPLORING:
        live.dungeon, evs = games.step_dungeon(live.dungeon, state)
        live.steps.append({"inputs": [], "stance": "None", "spawn_origin_ms": None})
        events.extend(evs)
    return events


def create_app(
    chain: Optional[ledger.Chain] = None,
    chain_path: Optional[str] = None,
    master_seed: int = 0,
    now_us: Optional[Callable[[], int]] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    if chain is None:
        chain = ledger.Chain(chain_id=0)
    store = ServiceStore(chain, chain_path, master_seed, now_us)
    app = FastAPI(title="rhythm-dungeon", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.get("/time")
    def server_time() -> CanonicalJSONResponse:
        return CanonicalJSONResponse({"server_us": store.now_us()})

    @app.post("/sessions")
    def start_session(payload: dict = Body(...)) -> CanonicalJSONResponse:
        name = payload.get("player_name", "")
        try:
            boost = payload.get("enemy_boost")
            enemy_boost = None
            if boost is not None:
                enemy_boost = (int(boost["room"]), int(boost["level"]))
            p_fetch = int(payload.get("p_fetch_percent", 50))
            if not 0 <= p_fetch <= 100:
                raise ValueError("p_fetch_percent must be 0..100")
            offset_us = int(payload.get("offset_us", 0))
            seed = payload.get("seed")
            seed = None if seed is None else int(seed)
        except (ValueError, TypeError, KeyError) as exc:
            return _error(400, "BadRequest", str(exc))
        with store.lock:
            if seed is None:
                seed = store.default_seed()
            try:
                origin_ms = store.now_us() // 1000
                session = games.new_dungeon_session(
                    str(name),
                    seed,
                    origin_ms=origin_ms,
                    p_fetch_percent=p_fetch,
                    enemy_boost=enemy_boost,
                )
            except chars.BadName as exc:
                return _error(400, "BadName", str(exc))
            except ValueError as exc:
                return _error(400, "BadRequest", str(exc))
            live = LiveSession(
                session_id=store.new_session_id(),
                dungeon=session,
                snapshot=store.state,
                origin_ms=origin_ms,
                offset_us=offset_us,
            )
            # The first spawn is pinned to the creation clock; later ones
            # follow the grid so the music never skips.
            live.dungeon, events = games.step_dungeon(
                live.dungeon, live.snapshot, spawn_origin_ms=origin_ms
            )
            live.steps.append(
                {"inputs": [], "stance": "None", "spawn_origin_ms": origin_ms}
            )
            live.events.extend(events)
            live.last_events = list(events)
            live.bump()
            store.sessions[live.session_id] = live
            return CanonicalJSONResponse(_session_view(live), status_code=201)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> CanonicalJSONResponse:
        with store.lock:
            live = store.sessions.get(session_id)
            if live is None:
                return _error(404, "UnknownSession", session_id)
            return CanonicalJSONResponse(_session_view(live))

    @app.post("/sessions/{session_id}/window")
    def submit_window(session_id: str, payload: dict = Body(...)) -> CanonicalJSONResponse:
        with store.lock:
            live = store.sessions.get(session_id)
            if live is None:
                return _error(404, "UnknownSession", session_id)
            session = live.dungeon
            if session.phase != games.PHASE_IN_BATTLE:
                return _error(409, "SessionOver", session.phase)
            grid = session.grid
            assert grid is not None
            deadline = grid.window_deadline_us(session.window_index)
            try:
                raw = sorted(payload.get("inputs", []), key=lambda r: int(r["at_us"]))
                inputs = rhythm.trace_from_jsonable(raw)
            except (ValueError, TypeError, KeyError) as exc:
                return _error(400, "BadInputs", str(exc))
            if any(event.at_us > deadline for event in inputs):
                return _error(409, "WindowClosed", f"deadline was {deadline}")
            stance = str(payload.get("stance", "None"))
            live.dungeon, events = games.step_dungeon(
                live.dungeon, live.snapshot, inputs, stance
            )
            live.steps.append(
                {
                    "inputs": rhythm.trace_to_jsonable(inputs),
                    "stance": stance,
                    "spawn_origin_ms": None,
                }
            )
            all_events = list(events)
            all_events.extend(_advance_spawns(live, live.snapshot))
            live.events.extend(all_events)
            live.last_events = all_events
            live.bump()
            return CanonicalJSONResponse(_session_view(live))

    @app.post("/sessions/{session_id}/allocate")
    def allocate(session_id: str, payload: dict = Body(...)) -> CanonicalJSONResponse:
        with store.lock:
            live = store.sessions.get(session_id)
            if live is None:
                return _error(404, "UnknownSession", session_id)
            attribute = str(payload.get("attribute", ""))
            try:
                live.dungeon = games.allocate_in_session(live.dungeon, attribute)
            except games.SessionOver as exc:
                return _error(409, "SessionOver", str(exc))
            except chars.NoPoints as exc:
                return _error(409, "NoPoints", str(exc))
            except chars.AttributeCap as exc:
                return _error(409, "AttributeCap", str(exc))
            except ValueError as exc:
                return _error(400, "BadAttribute", str(exc))
            live.steps.append({"allocate": attribute})
            event = {"type": "allocate", "attribute": attribute}
            live.events.append(event)
            live.last_events = [event]
            live.bump()
            return CanonicalJSONResponse(_session_view(live))

    @app.post("/sessions/{session_id}/retire")
    def retire_session(session_id: str) -> CanonicalJSONResponse:
        with store.lock:
            live = store.sessions.get(session_id)
            if live is None:
                return _error(404, "UnknownSession", session_id)
            try:
                live.dungeon = games.retire(live.dungeon)
            except games.SessionOver as exc:
                return _error(409, "SessionOver", str(exc))
            live.steps.append({"retire": True})
            event = {"type": "retire", "room": live.dungeon.room_index}
            live.events.append(event)
            live.last_events = [event]
            live.bump()
            return CanonicalJSONResponse(_session_view(live))

    @app.post("/sessions/{session_id}/upload")
    def upload(session_id: str) -> CanonicalJSONResponse:
        with store.lock:
            live = store.sessions.get(session_id)
            if live is None:
                return _error(404, "UnknownSession", session_id)
            try:
                tx = games.finish_and_upload(
                    live.dungeon,
                    nonce=ledger.next_nonce(store.chain, live.dungeon.player),
                )
            except games.SessionActive as exc:
                return _error(409, "SessionActive", str(exc))
            tip = store.chain.tip
            timestamp = max(store.now_us() // 1000, tip.timestamp if tip else 0)
            store.chain = ledger.append_block(store.chain, [tx], timestamp)
            if store.chain_path:
                ledger.save_chain(store.chain, store.chain_path)
            state, receipts = ledger.replay_receipts(store.chain)
            store.state = state
            receipt = receipts[-1]
            live.bump()
            return CanonicalJSONResponse(
                {
                    "character_id": receipt.get("character_id"),
                    "rejected": receipt["rejected"],
                    "block_height": receipt["height"],
                    "block_digest": store.chain.blocks[-1].digest,
                },
                status_code=201,
            )

    @app.get("/sessions/{session_id}/log")
    def session_log(session_id: str) -> CanonicalJSONResponse:
        with store.lock:
            live = store.sessions.get(session_id)
            if live is None:
                return _error(404, "UnknownSession", session_id)
            return CanonicalJSONResponse(
                {
                    "session_id": live.session_id,
                    "player": live.dungeon.player,
                    "seed": live.dungeon.seed,
                    "origin_ms": live.origin_ms,
                    "steps": live.steps,
                    "events": live.events,
                }
            )

    @app.get("/chain/blocks")
    def chain_blocks(from_height: int = Query(0, alias="from")) -> CanonicalJSONResponse:
        with store.lock:
            blocks = [b.to_dict() for b in store.chain.blocks[max(from_height, 0):]]
            return CanonicalJSONResponse(
                {"chain_id": store.chain.chain_id, "blocks": blocks}
            )

    @app.get("/chain/characters")
    def chain_characters() -> CanonicalJSONResponse:
        with store.lock:
            records = [
                dict(record.to_dict(), character_id=cid)
                for cid, record in enumerate(store.state.characters)
            ]
            return CanonicalJSONResponse({"characters": records})

    @app.get("/chain/characters/{character_id}")
    def chain_character(character_id: int) -> CanonicalJSONResponse:
        with store.lock:
            if not 0 <= character_id < len(store.state.characters):
                return _error(404, "UnknownCharacter", str(character_id))
            record = store.state.characters[character_id]
            return CanonicalJSONResponse(
                dict(record.to_dict(), character_id=character_id)
            )

    @app.get("/chain/state-digest")
    def chain_state_digest() -> CanonicalJSONResponse:
        with store.lock:
            return CanonicalJSONResponse({"digest": genesis.state_digest(store.state)})

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        await websocket.accept()
        last_version = -1
        try:
            while True:
                with store.lock:
                    live = store.sessions.get(session_id)
                    if live is None:
                        await websocket.close(code=4404)
                        return
                    version = live.version
                    announcement = _announcement(live)
                if version != last_version:
                    last_version = version
                    await websocket.send_text(canonical_json(announcement))
                    if announcement.get("phase") in (games.PHASE_DEAD, games.PHASE_RETIRED):
                        await websocket.close()
                        return
                await asyncio.sleep(0.05)
        except WebSocketDisconnect:
            return

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _announcement(live: LiveSession) -> dict:
    session = live.dungeon
    grid = session.grid
    if session.phase != games.PHASE_IN_BATTLE or grid is None:
        return {"phase": session.phase}
    w = session.window_index
    return {
        "window_index": w,
        "bpm": grid.bpm,
        "beat_times_us": [grid.beat_time_us(b) for b in grid.judged_beats(w)],
    }
