import json

import pytest
from fastapi.testclient import TestClient

from rhythm_dungeon import games, genesis, ledger
from rhythm_dungeon.service import create_app

FIXED_NOW_US = 1_700_000_000_000_000


@pytest.fixture()
def client(tmp_path):
    chain_path = str(tmp_path / "chain_0.ndjson")
    chain = ledger.Chain(chain_id=0)
    ledger.save_chain(chain, chain_path)
    app = create_app(chain=chain, chain_path=chain_path, now_us=lambda: FIXED_NOW_US)
    with TestClient(app) as test_client:
        yield test_client


def start(client, name="ada", seed=7, **extra):
    response = client.post("/sessions", json={"player_name": name, "seed": seed, **extra})
    assert response.status_code == 201, response.text
    return response.json()


def perfect_inputs(view):
    window = view["window"]
    return [
        {"at_us": at, "button": button}
        for at, button in zip(window["beat_times_us"], window["expected"])
    ]


def play_to_death(client, view):
    sid = view["session_id"]
    while view["phase"] == "InBattle":
        response = client.post(f"/sessions/{sid}/window", json={"inputs": [], "stance": "None"})
        assert response.status_code == 200
        view = response.json()
    return view


def test_time_endpoint(client):
    assert client.get("/time").json() == {"server_us": FIXED_NOW_US}


def test_start_session_view_shape(client):
    view = start(client)
    assert view["phase"] == "InBattle"
    assert view["room_index"] == 0
    assert view["character"]["level"] == 1
    assert view["character"]["max_health"] == 30
    assert view["origin_ms"] == FIXED_NOW_US // 1000
    window = view["window"]
    assert len(window["expected"]) == 4
    assert len(window["beat_times_us"]) == 4
    assert window["deadline_us"] > window["beat_times_us"][-1]


def test_start_session_bad_name(client):
    response = client.post("/sessions", json={"player_name": ""})
    assert response.status_code == 400
    assert response.json()["error"] == "BadName"


def test_start_session_rejects_malformed_payloads(client):
    for payload in (
        {"player_name": "x", "seed": "garbage"},
        {"player_name": "x", "p_fetch_percent": 999},
        {"player_name": "x", "enemy_boost": {"room": "a"}},
    ):
        response = client.post("/sessions", json=payload)
        assert response.status_code == 400
        assert response.json()["error"] == "BadRequest"


def test_session_ids_distinct(client):
    a = start(client, seed=1)
    b = start(client, seed=2)
    assert a["session_id"] != b["session_id"]


def test_unknown_session_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/window", json={"inputs": []}).status_code == 404
    assert client.post("/sessions/nope/upload").status_code == 404


def test_submit_perfect_window_charges_player(client):
    view = start(client)
    assert view["window"]["expected"] == ["D", "D", "D", "D"]
    response = client.post(
        f"/sessions/{view['session_id']}/window",
        json={"inputs": perfect_inputs(view), "stance": "None"},
    )
    assert response.status_code == 200
    after = response.json()
    window_events = [e for e in after["last_events"] if e["type"] == "window"]
    assert window_events[0]["action"] == "Charge"
    assert after["battle"]["player_charged"] is True
    assert [j["outcome"] for j in window_events[0]["judgements"]] == ["Hit"] * 4


def test_submit_empty_window_stumbles(client):
    view = start(client)
    response = client.post(
        f"/sessions/{view['session_id']}/window", json={"inputs": [], "stance": "None"}
    )
    after = response.json()
    window_events = [e for e in after["last_events"] if e["type"] == "window"]
    assert window_events[0]["action"] == "Stumble"
    assert after["tally"]["miss"] == 4


def test_window_closed_on_late_inputs(client):
    view = start(client)
    deadline = view["window"]["deadline_us"]
    response = client.post(
        f"/sessions/{view['session_id']}/window",
        json={"inputs": [{"at_us": deadline + 1, "button": "L"}]},
    )
    assert response.status_code == 409
    assert response.json()["error"] == "WindowClosed"
    # The window is still pending: an in-time submission succeeds.
    response = client.post(
        f"/sessions/{view['session_id']}/window", json={"inputs": perfect_inputs(view)}
    )
    assert response.status_code == 200


def test_upload_requires_finished_session(client):
    view = start(client)
    response = client.post(f"/sessions/{view['session_id']}/upload")
    assert response.status_code == 409
    assert response.json()["error"] == "SessionActive"


def test_death_upload_receipt_and_read_back(client):
    view = start(client, name="doomed", enemy_boost={"room": 0, "level": 30})
    view = play_to_death(client, view)
    assert view["phase"] == "Dead"
    sid = view["session_id"]
    receipt = client.post(f"/sessions/{sid}/upload").json()
    assert receipt["rejected"] is None
    cid = receipt["character_id"]
    assert cid == 0
    record = client.get(f"/chain/characters/{cid}").json()
    assert record["character"]["name"] == "doomed"
    assert record["character"]["weakness"] == "Miss"
    assert record["origin_game"] == "RhythmDungeon"
    blocks = client.get("/chain/blocks", params={"from": 0}).json()["blocks"]
    assert len(blocks) == 1
    assert blocks[0]["txs"][0]["submitter"] == "doomed"


def test_retire_then_upload(client):
    view = start(client, name="leaver")
    sid = view["session_id"]
    response = client.post(f"/sessions/{sid}/retire")
    assert response.status_code == 200
    assert response.json()["phase"] == "Retired"
    receipt = client.post(f"/sessions/{sid}/upload").json()
    assert receipt["rejected"] is None


def test_allocate_endpoint(client):
    view = start(client, name="hoarder")
    sid = view["session_id"]
    response = client.post(f"/sessions/{sid}/allocate", json={"attribute": "strength"})
    assert response.status_code == 409
    assert response.json()["error"] == "NoPoints"


def test_chain_browse_is_credential_free(client):
    digest = client.get("/chain/state-digest").json()["digest"]
    assert len(digest) == 64
    assert client.get("/chain/characters").json() == {"characters": []}
    empty_state = genesis.register_chain(genesis.GenesisState.empty(), 0)
    assert digest == genesis.state_digest(empty_state)


def test_responses_are_canonical_json(client):
    raw = client.get("/chain/state-digest").text
    parsed = json.loads(raw)
    assert raw == json.dumps(parsed, sort_keys=True, separators=(",", ":"))


def test_offline_replay_reproduces_event_log(client, tmp_path):
    view = start(client, name="audit", seed=12345, enemy_boost={"room": 2, "level": 30})
    sid = view["session_id"]
    while view["phase"] == "InBattle":
        response = client.post(
            f"/sessions/{sid}/window",
            json={"inputs": perfect_inputs(view), "stance": "None"},
        )
        assert response.status_code == 200
        view = response.json()
    assert view["phase"] == "Dead"
    assert view["room_index"] >= 1
    log = client.get(f"/sessions/{sid}/log").json()
    session = games.new_dungeon_session(
        log["player"],
        log["seed"],
        origin_ms=log["origin_ms"],
        enemy_boost=(2, 30),
    )
    snapshot = genesis.register_chain(genesis.GenesisState.empty(), 0)
    replayed_session, replayed_events = games.run_recorded_steps(
        session, snapshot, log["steps"]
    )
    assert replayed_events == log["events"]
    assert replayed_session.phase == "Dead"


def test_stream_announces_pending_window(client):
    view = start(client, name="listener")
    sid = view["session_id"]
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        message = json.loads(ws.receive_text())
        assert message["window_index"] == view["window"]["window_index"]
        assert message["bpm"] == view["window"]["bpm"]
        assert message["beat_times_us"] == view["window"]["beat_times_us"]
