import numpy as np
import pytest
from fastapi.testclient import TestClient

from shared_autonomy.service import SessionState, create_app, scene_metadata


@pytest.fixture(scope="module")
def client(request):
    runtime = request.getfixturevalue("default_runtime")
    app = create_app(runtime, lockstep=True)
    with TestClient(app) as c:
        yield c


def zero_input(dims=2, capture=False):
    return {"type": "input", "vec": [0.0] * dims, "capture": capture}


def test_scene_endpoint(client, default_runtime):
    meta = client.get("/api/scene").json()
    assert meta["dims"] == 2
    assert meta["v_max"] == 0.5
    assert len(meta["goals"]) == 3
    assert meta["goals"][0]["targets"][0]["id"] == "t0"
    assert meta["scene_hash"] == default_runtime.scene_hash()
    assert set(meta["methods"]) == {"policy", "blend", "direct"}


def test_heatmap_endpoint(client):
    payload = client.get("/api/heatmap", params={"goal": "g0"}).json()
    assert payload["type"] == "heatmap"
    assert payload["rows"] == payload["cols"] == 64
    assert len(payload["values"]) == 64 * 64


def test_heatmap_unknown_goal_404(client):
    assert client.get("/api/heatmap", params={"goal": "g9"}).status_code == 404


def test_heatmap_unknown_session_404(client):
    r = client.get("/api/heatmap", params={"session": "nope"})
    assert r.status_code == 404


def test_session_created_and_frames_tick(client):
    with client.websocket_connect("/ws?method=direct") as ws:
        hello = ws.receive_json()
        assert hello["type"] == "session"
        assert hello["session"]
        for tick in range(1, 4):
            ws.send_json(zero_input())
            frame = ws.receive_json()
            assert frame["type"] == "frame"
            assert frame["tick"] == tick
            assert frame["status"] == "running"
            assert sum(frame["belief"].values()) == pytest.approx(1.0, abs=1e-9)


def test_direct_with_zero_input_never_moves(client, default_runtime):
    start = default_runtime.scene.start_state.pos
    with client.websocket_connect("/ws?method=direct") as ws:
        ws.receive_json()
        for _ in range(5):
            ws.send_json(zero_input())
            frame = ws.receive_json()
        np.testing.assert_allclose(frame["x"], start, atol=1e-12)


def test_policy_progresses_without_input(client, default_runtime):
    start = default_runtime.scene.start_state.pos
    with client.websocket_connect("/ws?method=policy") as ws:
        ws.receive_json()
        for _ in range(10):
            ws.send_json(zero_input())
            frame = ws.receive_json()
        assert np.linalg.norm(np.array(frame["x"]) - start) > 0.05


def test_set_method_preserves_belief(client):
    with client.websocket_connect("/ws?method=direct") as ws:
        ws.receive_json()
        for _ in range(5):
            ws.send_json({"type": "input", "vec": [0.0, 1.0]})
            frame = ws.receive_json()
        belief_before = frame["belief"]
        ws.send_json({"type": "set_method", "method": "policy"})
        ack = ws.receive_json()
        assert ack == {"type": "ack", "method": "policy"}
        ws.send_json(zero_input())
        frame = ws.receive_json()
        # one zero-input update nudges the belief, but it must not reset to uniform
        assert frame["belief"] != pytest.approx({g: 1 / 3 for g in belief_before}, abs=1e-6)


def test_set_method_unknown_is_error(client):
    with client.websocket_connect("/ws") as ws:
        ws.receive_json()
        ws.send_json({"type": "set_method", "method": "warp"})
        assert ws.receive_json()["type"] == "error"


def test_reset_returns_to_start(client, default_runtime):
    start = default_runtime.scene.start_state.pos
    with client.websocket_connect("/ws?method=direct") as ws:
        ws.receive_json()
        for _ in range(5):
            ws.send_json({"type": "input", "vec": [1.0, 0.0]})
            ws.receive_json()
        ws.send_json({"type": "reset"})
        ws.receive_json()
        ws.send_json(zero_input())
        frame = ws.receive_json()
        assert frame["tick"] == 1
        np.testing.assert_allclose(frame["x"], start, atol=1e-12)


def test_session_resume_by_id(client):
    with client.websocket_connect("/ws?method=direct") as ws:
        sid = ws.receive_json()["session"]
        ws.send_json({"type": "input", "vec": [0.0, 1.0]})
        frame = ws.receive_json()
    with client.websocket_connect(f"/ws?session={sid}") as ws:
        assert ws.receive_json()["session"] == sid
        ws.send_json(zero_input())
        resumed = ws.receive_json()
        assert resumed["tick"] == frame["tick"] + 1


def test_malformed_input_is_reported_not_fatal(client):
    with client.websocket_connect("/ws") as ws:
        ws.receive_json()
        ws.send_json({"type": "input", "vec": [1.0]})  # wrong dimensionality
        assert ws.receive_json()["type"] == "error"
        ws.send_json(zero_input())  # connection still alive
        assert ws.receive_json()["type"] == "frame"


def test_unknown_message_type_is_error(client):
    with client.websocket_connect("/ws") as ws:
        ws.receive_json()
        ws.send_json({"type": "dance"})
        assert ws.receive_json()["type"] == "error"


def test_heatmap_over_websocket(client):
    with client.websocket_connect("/ws") as ws:
        ws.receive_json()
        ws.send_json({"type": "heatmap", "goal": "g0"})
        payload = ws.receive_json()
        assert payload["type"] == "heatmap"
        assert payload["goal"] == "g0"
        ws.send_json({"type": "heatmap", "goal": "g9"})
        assert ws.receive_json()["type"] == "error"
        ws.send_json({"type": "heatmap"})
        assert ws.receive_json()["goal"] == "belief-weighted"


def test_capture_requires_button_near_target(client, default_runtime):
    scene = default_runtime.scene
    target = scene.goals[0].targets[0].pos
    with client.websocket_connect("/ws?method=direct") as ws:
        ws.receive_json()
        status = "running"
        for _ in range(200):
            # steer straight at the target, holding the capture button
            frame = None
            ws.send_json({"type": "input", "vec": [0.0, 0.0], "capture": True})
            frame = ws.receive_json()
            x = np.array(frame["x"])
            d = target - x
            dist = np.linalg.norm(d)
            if frame["status"] == "captured":
                status = "captured"
                break
            vec = (d / dist if dist > 1e-9 else d).tolist()
            ws.send_json({"type": "input", "vec": vec, "capture": True})
            frame = ws.receive_json()
            if frame["status"] == "captured":
                status = "captured"
                break
        assert status == "captured"


def test_capture_button_far_from_target_does_nothing(client):
    with client.websocket_connect("/ws?method=direct") as ws:
        ws.receive_json()
        ws.send_json({"type": "input", "vec": [0.0, 0.0], "capture": True})
        assert ws.receive_json()["status"] == "running"


def test_session_state_input_validation(default_runtime):
    st = SessionState(default_runtime, method="direct")
    with pytest.raises(ValueError):
        st.apply_input([2.5, float("nan")])
    with pytest.raises(ValueError):
        st.apply_input([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        SessionState(default_runtime, method="warp")


def test_input_hold_decays_to_zero(default_runtime):
    st = SessionState(default_runtime, method="direct")
    st.tick({"vec": [1.0, 0.0]})
    x_after_input = st.x.pos.copy()
    assert not np.allclose(x_after_input, default_runtime.scene.start_state.pos)
    # silent ticks keep the held input for 0.5 s, then zero it
    for _ in range(st._hold_ticks):
        st.tick(None)
    x_held = st.x.pos.copy()
    st.tick(None)
    st.tick(None)
    np.testing.assert_allclose(st.x.pos, x_held, atol=1e-12)


def test_scene_metadata_round_trips_json(default_runtime):
    import json

    meta = scene_metadata(default_runtime)
    assert json.loads(json.dumps(meta)) == meta
