"""Line-oriented streaming scorer: per-frame prediction plus suggestions.

Wire protocol (UTF-8, one JSON object per LF-terminated line, one reply
line per request line, in order):

* hello {session_id, profile, config, scheme[, questionnaire]} -> ack
* frame {session_id, <telemetry fields>} -> prediction reply with the
  class distribution and any mitigation suggestions
* end {session_id} -> summary {frames_seen, mean_predicted_level}

Replies always carry ``"ok"``. Unknown sessions and malformed lines get an
error reply and the connection survives; a timestamp regression gets an
error reply and closes that session. Cause inference runs once at hello
from the model's stored attribute ranking and refreshes every 100 frames
from the session's accumulated telemetry means.
"""

from __future__ import annotations

import json
import socketserver
from dataclasses import dataclass, field

import numpy as np

from .advisor import CauseFinding, advise, default_cause_map, infer_causes
from .records import GameConfig, TelemetryFrame, UserProfile, VRSQReport, encode_frame_vector
from .registry import GENDER_CODES, LabelScheme, VRSQ_SYMPTOMS
from .trees import _TreeEstimatorBase

REFRESH_EVERY = 100

_GAME_ATTRIBUTES = (
    "timestamp",
    "speed",
    "acceleration",
    "rotation_x",
    "rotation_y",
    "rotation_z",
    "position_x",
    "position_y",
    "position_z",
    "region_of_interest",
    "fov_size",
    "frame_rate",
)


@dataclass
class SessionState:
    session_id: str
    profile: UserProfile
    questionnaire: VRSQReport
    config: GameConfig
    scheme: LabelScheme
    frames_seen: int = 0
    last_timestamp: float = -1.0
    level_sum: float = 0.0
    last_prediction: list[float] | None = None
    causes: list[CauseFinding] = field(default_factory=list)
    stat_sums: dict[str, float] = field(default_factory=dict)


def _error(message: str, **extra) -> dict:
    reply = {"ok": False, "kind": "error", "error": message}
    reply.update(extra)
    return reply


def _parse_profile(obj: dict) -> UserProfile:
    return UserProfile(
        gender=str(obj["gender"]),
        age=int(obj["age"]),
        vr_experience=int(obj["vr_experience"]),
        flicker_sensitivity=bool(obj["flicker_sensitivity"]),
        pre_symptoms=bool(obj["pre_symptoms"]),
        wears_glasses=bool(obj["wears_glasses"]),
        vision_impairment=bool(obj["vision_impairment"]),
        posture=str(obj["posture"]),
        dominant_eye=str(obj["dominant_eye"]),
    )


class ScoringService:
    """Protocol core, transport-free: one JSON message in, one reply out.

    Session states live in the store the caller owns (one per connection),
    so concurrent connections cannot observe each other.
    """

    def __init__(
        self,
        model: _TreeEstimatorBase,
        ranking=None,
        cause_map=None,
        threshold: float = 0.5,
        top_n: int = 5,
    ):
        self.model = model
        self.ranking = ranking
        self.cause_map = cause_map if cause_map is not None else default_cause_map()
        self.threshold = threshold
        self.top_n = top_n
        self.model_scheme = LabelScheme(model.scheme_)

    def handle_line(self, line: bytes | str, sessions: dict[str, SessionState], byte_offset: int = 0) -> dict:
        text = line.decode("utf-8", errors="replace") if isinstance(line, bytes) else line
        try:
            message = json.loads(text)
        except json.JSONDecodeError as exc:
            return _error(f"malformed line: {exc.msg}", byte_offset=byte_offset)
        if not isinstance(message, dict) or "kind" not in message:
            return _error("message must be an object with a 'kind'", byte_offset=byte_offset)
        kind = message["kind"]
        try:
            if kind == "hello":
                return self._handle_hello(message, sessions)
            if kind == "frame":
                return self._handle_frame(message, sessions)
            if kind == "end":
                return self._handle_end(message, sessions)
        except (KeyError, TypeError, ValueError) as exc:
            return _error(f"bad {kind} message: {exc}")
        return _error(f"unknown message kind {kind!r}")

    def _handle_hello(self, message: dict, sessions: dict[str, SessionState]) -> dict:
        session_id = str(message["session_id"])
        profile = _parse_profile(message["profile"])
        if profile.gender not in GENDER_CODES:
            return _error(f"bad profile gender {profile.gender!r}")
        config_obj = message["config"]
        config = GameConfig(
            static_rest_frame=bool(config_obj["static_rest_frame"]),
            haptic_feedback=bool(config_obj["haptic_feedback"]),
            camera_control_level=int(config_obj["camera_control_level"]),
            dof_simulation=bool(config_obj["dof_simulation"]),
            auto_camera=bool(config_obj["auto_camera"]),
        )
        scheme = LabelScheme(message["scheme"])
        if scheme is not self.model_scheme and not (
            scheme is LabelScheme.BINARY and self.model_scheme is LabelScheme.QUARTERLY
        ):
            return _error(
                f"model predicts {self.model_scheme.value}; cannot serve {scheme.value}"
            )
        scores = message.get("questionnaire", [0] * len(VRSQ_SYMPTOMS))
        if len(scores) != len(VRSQ_SYMPTOMS):
            return _error(f"questionnaire must list {len(VRSQ_SYMPTOMS)} scores")
        questionnaire = VRSQReport(
            phase="pre", items=tuple((n, int(s)) for n, s in zip(VRSQ_SYMPTOMS, scores))
        )
        state = SessionState(
            session_id=session_id,
            profile=profile,
            questionnaire=questionnaire,
            config=config,
            scheme=scheme,
        )
        if self.ranking is not None:
            state.causes = infer_causes(self.ranking, None, self.top_n, self.cause_map)
        sessions[session_id] = state
        return {"ok": True, "kind": "ack", "session_id": session_id}

    def _handle_frame(self, message: dict, sessions: dict[str, SessionState]) -> dict:
        session_id = str(message.get("session_id"))
        state = sessions.get(session_id)
        if state is None:
            return _error(f"unknown session {session_id!r}")
        frame = TelemetryFrame(
            timestamp=float(message["timestamp"]),
            speed=float(message["speed"]),
            acceleration=float(message["acceleration"]),
            rotation_x=float(message["rotation_x"]),
            rotation_y=float(message["rotation_y"]),
            rotation_z=float(message["rotation_z"]),
            position_x=float(message["position_x"]),
            position_y=float(message["position_y"]),
            position_z=float(message["position_z"]),
            region_of_interest=int(message["region_of_interest"]),
            fov_size=float(message["fov_size"]),
            frame_rate=float(message["frame_rate"]),
        )
        if frame.timestamp <= state.last_timestamp:
            del sessions[session_id]
            return _error(
                f"timestamp regression in session {session_id!r}; session closed"
            )
        state.last_timestamp = frame.timestamp

        vector = encode_frame_vector(state.profile, state.questionnaire, state.config, frame)
        distribution = self.model.predict_proba(np.asarray(vector).reshape(1, -1))[0]
        if state.scheme is LabelScheme.BINARY and self.model_scheme is LabelScheme.QUARTERLY:
            distribution = np.array([distribution[0], distribution[1:].sum()])
        predicted = int(np.argmax(distribution))

        state.frames_seen += 1
        state.level_sum += predicted
        state.last_prediction = [float(p) for p in distribution]
        for name in _GAME_ATTRIBUTES:
            state.stat_sums[name] = state.stat_sums.get(name, 0.0) + abs(float(getattr(frame, name)))
        if self.ranking is not None and state.frames_seen % REFRESH_EVERY == 0:
            stats = {k: v / state.frames_seen for k, v in state.stat_sums.items()}
            state.causes = infer_causes(self.ranking, stats, self.top_n, self.cause_map)

        suggestions = advise(distribution, state.causes, threshold=self.threshold)
        return {
            "ok": True,
            "kind": "prediction",
            "session_id": session_id,
            "predicted_class": predicted,
            "distribution": state.last_prediction,
            "suggestions": [s.to_dict() for s in suggestions],
        }

    def _handle_end(self, message: dict, sessions: dict[str, SessionState]) -> dict:
        session_id = str(message.get("session_id"))
        state = sessions.pop(session_id, None)
        if state is None:
            return _error(f"unknown session {session_id!r}")
        mean_level = state.level_sum / state.frames_seen if state.frames_seen else 0.0
        return {
            "ok": True,
            "kind": "summary",
            "session_id": session_id,
            "frames_seen": state.frames_seen,
            "mean_predicted_level": mean_level,
        }


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        service: ScoringService = self.server.service  # type: ignore[attr-defined]
        sessions: dict[str, SessionState] = {}
        offset = 0
        for raw in self.rfile:
            line = raw.rstrip(b"\n").rstrip(b"\r")
            reply = service.handle_line(line, sessions, byte_offset=offset)
            offset += len(raw)
            payload = json.dumps(reply, separators=(",", ":")).encode("utf-8") + b"\n"
            self.wfile.write(payload)
            self.wfile.flush()


class ScoringServer(socketserver.ThreadingTCPServer):
    """TCP wrapper around :class:`ScoringService`; one state dict per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: ScoringService):
        super().__init__(address, _Handler)
        self.service = service


def serve_forever(service: ScoringService, host: str = "127.0.0.1", port: int = 9000) -> None:
    with ScoringServer((host, port), service) as server:
        server.serve_forever()
