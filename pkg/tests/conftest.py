from __future__ import annotations

import pytest

from cybersick.records import GameConfig, SessionRecord, TelemetryFrame, UserProfile, VRSQReport
from cybersick.registry import Game, VRSQ_SYMPTOMS
from cybersick.simulate import SimParams, generate_corpus


def make_profile(**overrides) -> UserProfile:
    base = dict(
        gender="male",
        age=25,
        vr_experience=2,
        flicker_sensitivity=False,
        pre_symptoms=False,
        wears_glasses=False,
        vision_impairment=False,
        posture="sitting",
        dominant_eye="right",
    )
    base.update(overrides)
    return UserProfile(**base)


def make_questionnaire(phase: str = "pre", scores=None) -> VRSQReport:
    scores = scores or [0] * len(VRSQ_SYMPTOMS)
    return VRSQReport(phase=phase, items=tuple(zip(VRSQ_SYMPTOMS, scores)))


def make_config(**overrides) -> GameConfig:
    base = dict(
        static_rest_frame=True,
        haptic_feedback=False,
        camera_control_level=1,
        dof_simulation=False,
        auto_camera=False,
    )
    base.update(overrides)
    return GameConfig(**base)


def make_frame(timestamp: float, reported=None, **overrides) -> TelemetryFrame:
    base = dict(
        timestamp=timestamp,
        speed=20.0,
        acceleration=0.0,
        rotation_x=0.0,
        rotation_y=0.0,
        rotation_z=0.0,
        position_x=timestamp * 20.0,
        position_y=0.0,
        position_z=0.0,
        region_of_interest=0,
        fov_size=90.0,
        frame_rate=72.0,
        reported_discomfort=reported,
    )
    base.update(overrides)
    return TelemetryFrame(**base)


def make_session(frames, game: Game = Game.RACE, session_id: str = "s-0", **kwargs) -> SessionRecord:
    return SessionRecord(
        session_id=session_id,
        game=game,
        profile=kwargs.get("profile", make_profile()),
        pre_questionnaire=kwargs.get("pre_questionnaire", make_questionnaire()),
        post_questionnaire=kwargs.get("post_questionnaire"),
        config=kwargs.get("config", make_config()),
        frames=tuple(frames),
    )


@pytest.fixture(scope="session")
def small_corpus():
    """Mixed race/flight corpus, ~1.2k rows; shared across test modules."""
    sessions, traces = generate_corpus({"race": 2, "flight": 2}, seed=13, unit="sessions")
    return sessions, traces


@pytest.fixture(scope="session")
def noisefree_corpus():
    """Every frame reports its latent level (no carry-forward noise)."""
    params = SimParams(report_prob=1.0)
    sessions, traces = generate_corpus({"race": 2, "flight": 1}, seed=5, params=params)
    return sessions, traces
