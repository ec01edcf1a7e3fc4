from __future__ import annotations

import json
import socket
import threading

import numpy as np
import pytest

from conftest import make_config, make_profile

from cybersick.data import build_dataset
from cybersick.evaluation import rank_attributes
from cybersick.registry import LabelScheme, Scenario
from cybersick.server import ScoringServer, ScoringService, SessionState
from cybersick.trees import make_learner


@pytest.fixture(scope="module")
def service(small_corpus_module):
    sessions, _ = small_corpus_module
    dataset = build_dataset(sessions, LabelScheme.BINARY, Scenario.C)
    model = make_learner("tree", seed=1, n_classes=2).fit(dataset.X, dataset.y)
    model.scheme_ = "binary"
    ranking = rank_attributes("tree", dataset, seed=1, overrides={"max_depth": 4})
    return ScoringService(model, ranking=ranking, threshold=0.5, top_n=5)


@pytest.fixture(scope="module")
def small_corpus_module():
    from cybersick.simulate import generate_corpus

    return generate_corpus({"race": 2, "flight": 2}, seed=13, unit="sessions")


def hello_message(session_id="s1", scheme="binary"):
    profile = make_profile()
    config = make_config()
    return {
        "kind": "hello",
        "session_id": session_id,
        "profile": {
            "gender": profile.gender,
            "age": profile.age,
            "vr_experience": profile.vr_experience,
            "flicker_sensitivity": profile.flicker_sensitivity,
            "pre_symptoms": profile.pre_symptoms,
            "wears_glasses": profile.wears_glasses,
            "vision_impairment": profile.vision_impairment,
            "posture": profile.posture,
            "dominant_eye": profile.dominant_eye,
        },
        "config": {
            "static_rest_frame": True,
            "haptic_feedback": False,
            "camera_control_level": 1,
            "dof_simulation": False,
            "auto_camera": False,
        },
        "scheme": scheme,
    }


def frame_message(session_id="s1", timestamp=1.0, **overrides):
    message = {
        "kind": "frame",
        "session_id": session_id,
        "timestamp": timestamp,
        "speed": 25.0,
        "acceleration": 0.5,
        "rotation_x": 0.0,
        "rotation_y": 0.0,
        "rotation_z": 45.0,
        "position_x": 10.0,
        "position_y": 0.0,
        "position_z": 5.0,
        "region_of_interest": 2,
        "fov_size": 90.0,
        "frame_rate": 72.0,
    }
    message.update(overrides)
    return message


def send(service, sessions, message):
    return service.handle_line(json.dumps(message), sessions)


# ---------------------------------------------------------------------------
# protocol core


def test_hello_frame_end_exchange(service):
    sessions: dict[str, SessionState] = {}
    ack = send(service, sessions, hello_message())
    assert ack == {"ok": True, "kind": "ack", "session_id": "s1"}

    reply = send(service, sessions, frame_message(timestamp=1.0))
    assert reply["ok"] and reply["kind"] == "prediction"
    assert reply["predicted_class"] in (0, 1)
    assert len(reply["distribution"]) == 2
    assert sum(reply["distribution"]) == pytest.approx(1.0, abs=1e-9)
    assert isinstance(reply["suggestions"], list)

    summary = send(service, sessions, frame_message(timestamp=2.0))
    assert summary["ok"]
    done = send(service, sessions, {"kind": "end", "session_id": "s1"})
    assert done["kind"] == "summary"
    assert done["frames_seen"] == 2
    assert 0.0 <= done["mean_predicted_level"] <= 3.0
    assert sessions == {}  # no residual state


def test_unknown_session_errors_without_closing(service):
    sessions: dict[str, SessionState] = {}
    reply = send(service, sessions, frame_message(session_id="ghost"))
    assert reply["ok"] is False and "ghost" in reply["error"]
    # the connection-level store still works afterwards
    assert send(service, sessions, hello_message())["ok"]


def test_malformed_line_reports_byte_offset(service):
    sessions: dict[str, SessionState] = {}
    reply = service.handle_line("{oops", sessions, byte_offset=123)
    assert reply["ok"] is False
    assert reply["byte_offset"] == 123


def test_timestamp_regression_closes_session(service):
    sessions: dict[str, SessionState] = {}
    send(service, sessions, hello_message())
    assert send(service, sessions, frame_message(timestamp=5.0))["ok"]
    reply = send(service, sessions, frame_message(timestamp=4.0))
    assert reply["ok"] is False and "regression" in reply["error"]
    assert "s1" not in sessions
    follow_up = send(service, sessions, frame_message(timestamp=6.0))
    assert follow_up["ok"] is False  # session is gone


def test_unknown_kind_and_bad_fields(service):
    sessions: dict[str, SessionState] = {}
    assert send(service, sessions, {"kind": "noop"})["ok"] is False
    send(service, sessions, hello_message())
    bad = dict(frame_message())
    del bad["speed"]
    assert send(service, sessions, bad)["ok"] is False


def test_scheme_mismatch_rejected(service):
    sessions: dict[str, SessionState] = {}
    reply = send(service, sessions, hello_message(scheme="quarterly"))
    assert reply["ok"] is False and "binary" in reply["error"]


def test_quarterly_model_serves_binary_by_collapse(small_corpus_module):
    sessions_data, _ = small_corpus_module
    dataset = build_dataset(sessions_data, LabelScheme.QUARTERLY, Scenario.C)
    model = make_learner("tree", seed=1, n_classes=4).fit(dataset.X, dataset.y)
    service = ScoringService(model)
    sessions: dict[str, SessionState] = {}
    assert send(service, sessions, hello_message(scheme="binary"))["ok"]
    reply = send(service, sessions, frame_message())
    assert len(reply["distribution"]) == 2
    assert sum(reply["distribution"]) == pytest.approx(1.0, abs=1e-9)


def test_risk_shift_moves_predictions(service):
    # late high-rotation frames must predict higher than early still frames
    sessions: dict[str, SessionState] = {}
    send(service, sessions, hello_message(session_id="low"))
    send(service, sessions, hello_message(session_id="high"))
    low = send(
        service,
        sessions,
        frame_message(session_id="low", timestamp=1.0, rotation_z=0.0, speed=30.0,
                      acceleration=0.0, position_x=5.0, position_z=0.0),
    )
    high = send(
        service,
        sessions,
        frame_message(session_id="high", timestamp=290.0, rotation_z=270.0, speed=22.0,
                      acceleration=5.0, position_x=400.0, position_z=110.0,
                      region_of_interest=5),
    )
    p_low = 1.0 - low["distribution"][0]
    p_high = 1.0 - high["distribution"][0]
    assert p_high > p_low


def test_suggestions_appear_for_high_risk(service):
    sessions: dict[str, SessionState] = {}
    send(service, sessions, hello_message(session_id="hot"))
    reply = send(
        service,
        sessions,
        frame_message(session_id="hot", timestamp=295.0, rotation_z=300.0, speed=22.0,
                      acceleration=6.0, position_x=400.0, position_z=110.0),
    )
    if 1.0 - reply["distribution"][0] > 0.5:
        assert reply["suggestions"], "high predicted discomfort should carry suggestions"
        first = reply["suggestions"][0]
        assert set(first) == {"cause", "strategies", "evidence"}


def test_concurrent_sessions_get_identical_replies(service):
    # serving is read-only: two independent connections streaming the same
    # frames must receive byte-identical predictions
    store_a: dict[str, SessionState] = {}
    store_b: dict[str, SessionState] = {}
    send(service, store_a, hello_message())
    send(service, store_b, hello_message())
    for t in (1.0, 2.0, 3.0):
        reply_a = send(service, store_a, frame_message(timestamp=t))
        reply_b = send(service, store_b, frame_message(timestamp=t))
        assert reply_a == reply_b


def test_each_cause_suggestion_backed_by_evidence(service):
    sessions: dict[str, SessionState] = {}
    send(service, sessions, hello_message())
    reply = send(
        service,
        sessions,
        frame_message(timestamp=290.0, rotation_z=300.0, acceleration=6.0,
                      position_x=400.0, position_z=110.0),
    )
    for suggestion in reply["suggestions"]:
        assert suggestion["strategies"]
        assert suggestion["evidence"]


# ---------------------------------------------------------------------------
# socket integration


def test_tcp_round_trip(service):
    server = ScoringServer(("127.0.0.1", 0), service)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        with socket.create_connection(("127.0.0.1", port), timeout=5) as conn:
            payload = [hello_message(session_id="tcp")]
            payload += [frame_message(session_id="tcp", timestamp=float(i)) for i in range(1, 4)]
            payload += [{"kind": "end", "session_id": "tcp"}]
            raw = "".join(json.dumps(m) + "\n" for m in payload).encode()
            conn.sendall(raw)
            conn.shutdown(socket.SHUT_WR)
            received = b""
            while True:
                chunk = conn.recv(65536)
                if not chunk:
                    break
                received += chunk
    finally:
        server.shutdown()
        server.server_close()
    replies = [json.loads(line) for line in received.decode().splitlines()]
    assert len(replies) == 5  # one reply per request line, in order
    assert replies[0]["kind"] == "ack"
    assert all(r["kind"] == "prediction" for r in replies[1:4])
    assert replies[4]["kind"] == "summary" and replies[4]["frames_seen"] == 3
