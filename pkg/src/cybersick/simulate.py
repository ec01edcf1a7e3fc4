"""Seeded session simulator with a planted discomfort-risk model.

Stands in for human-subject data: kinematics follow a segmented path
(closed stadium track for the race, a wrapped 3D corridor for the flight),
and a latent risk in [0, 1] combines elapsed time, yaw rotation rate,
acceleration, and a profile susceptibility score. Thresholds quantize the
risk into the 0-3 discomfort levels; frames voice the latent level as a
report with probability ``report_prob`` (first frame always reports).

The latent level of every frame is exactly recomputable from the stored
telemetry: yaw rate is the wrapped difference of consecutive stored
rotation_z values over the frame interval (0 for the first frame), and
acceleration/timestamps are stored directly. Tests use this as the oracle.

Reference constants (rotation_ref_dps, accel_ref, speeds, geometry) are
toolkit defaults chosen for plausible gameplay, not measured values; see
docs/data-format.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .records import (
    GameConfig,
    SessionRecord,
    TelemetryFrame,
    UserProfile,
    VRSQReport,
)
from .registry import VRSQ_SYMPTOMS, Game
from .seeding import derive_seed, rng_from

N_ZONES = 12


@dataclass(frozen=True)
class PathSegment:
    """One stretch of path: arc length, yaw curvature (1/units), climb slope."""

    length: float
    curvature: float = 0.0
    climb: float = 0.0


DEFAULT_TRACK: tuple[PathSegment, ...] = (
    PathSegment(400.0, 0.0),
    PathSegment(math.pi * 60.0, 1.0 / 60.0),
    PathSegment(400.0, 0.0),
    PathSegment(math.pi * 60.0, 1.0 / 60.0),
)

DEFAULT_CORRIDOR: tuple[PathSegment, ...] = (
    PathSegment(500.0, 0.0, 0.12),
    PathSegment(120.0, 1.0 / 100.0, 0.0),
    PathSegment(400.0, 0.0, -0.08),
    PathSegment(140.0, 1.0 / 80.0, 0.0),
    PathSegment(450.0, 0.0, 0.05),
    PathSegment(130.0, 1.0 / 90.0, -0.04),
)


@dataclass(frozen=True)
class SimParams:
    duration_s: float = 300.0
    frame_interval_s: float = 1.5
    track: tuple[PathSegment, ...] = DEFAULT_TRACK
    corridor: tuple[PathSegment, ...] = DEFAULT_CORRIDOR
    risk_weights: tuple[float, float, float, float] = (0.4, 0.3, 0.2, 0.1)
    thresholds: tuple[float, float, float] = (0.25, 0.5, 0.75)
    report_prob: float = 0.15
    rotation_ref_dps: float = 30.0
    accel_ref: float = 6.0
    cruise_speed: float = 40.0
    corner_speed: float = 22.0
    accel_limit: float = 8.0

    def __post_init__(self) -> None:
        if self.frame_interval_s <= 0:
            raise ValueError("frame_interval_s must be positive")
        if abs(sum(self.risk_weights) - 1.0) > 1e-9:
            raise ValueError("risk weights must sum to 1")
        if any(w < 0 for w in self.risk_weights):
            raise ValueError("risk weights must be non-negative")
        t1, t2, t3 = self.thresholds
        if not 0 < t1 < t2 < t3 < 1:
            raise ValueError("thresholds must be strictly increasing within (0, 1)")
        if not 0 <= self.report_prob <= 1:
            raise ValueError("report_prob must be a probability")


@dataclass(frozen=True)
class RiskTrace:
    """Per-frame oracle: latent risk and the level it quantizes to."""

    timestamps: np.ndarray
    risk: np.ndarray
    levels: np.ndarray


def profile_susceptibility(profile: UserProfile) -> float:
    """Fixed affine susceptibility in [0, 1].

    Pre-existing symptoms and flicker sensitivity each add a third;
    inexperience contributes the rest (experience 3 contributes nothing).
    """
    inverted_experience = (3 - profile.vr_experience) / 3.0
    return (float(profile.pre_symptoms) + float(profile.flicker_sensitivity) + inverted_experience) / 3.0


def latent_level(risk: float, thresholds: tuple[float, float, float]) -> int:
    t1, t2, t3 = thresholds
    if risk < t1:
        return 0
    if risk < t2:
        return 1
    if risk < t3:
        return 2
    return 3


def risk_score(
    timestamp: float,
    rotation_rate_z: float,
    acceleration: float,
    profile: UserProfile,
    params: SimParams,
) -> float:
    """Latent discomfort risk in [0, 1] for one frame's kinematics."""
    w_time, w_rot, w_acc, w_prof = params.risk_weights
    raw = (
        w_time * (timestamp / params.duration_s)
        + w_rot * min(abs(rotation_rate_z) / params.rotation_ref_dps, 1.0)
        + w_acc * min(abs(acceleration) / params.accel_ref, 1.0)
        + w_prof * profile_susceptibility(profile)
    )
    return min(max(raw, 0.0), 1.0)


def wrapped_degrees_delta(current: float, previous: float) -> float:
    """Signed minimal rotation between two stored angles in [0, 360)."""
    return (current - previous + 180.0) % 360.0 - 180.0


# ---------------------------------------------------------------------------
# kinematics


def _segment_at(segments: Sequence[PathSegment], boundaries: np.ndarray, s: float) -> int:
    return min(int(np.searchsorted(boundaries, s, side="right")), len(segments) - 1)


def _kinematics(
    game: Game, params: SimParams, n_frames: int
) -> tuple[np.ndarray, ...]:
    segments = params.track if game is Game.RACE else params.corridor
    if len(segments) < 3:
        raise ValueError("path needs at least 3 segments")
    dt = params.frame_interval_s
    lengths = np.array([seg.length for seg in segments])
    total = float(lengths.sum())
    boundaries = np.cumsum(lengths)

    speed = np.empty(n_frames)
    heading = np.empty(n_frames)
    pitch = np.empty(n_frames)
    x = np.empty(n_frames)
    y = np.empty(n_frames)
    z = np.empty(n_frames)
    zone = np.empty(n_frames, dtype=np.int64)

    def target(seg: PathSegment) -> float:
        return params.cruise_speed if seg.curvature == 0.0 else params.corner_speed

    s = 0.0
    seg = segments[0]
    speed[0] = target(seg)
    heading[0] = 0.0
    pitch[0] = math.degrees(math.atan(seg.climb))
    x[0] = y[0] = z[0] = 0.0
    zone[0] = 0
    for i in range(1, n_frames):
        seg = segments[_segment_at(segments, boundaries, s)]
        dv = target(seg) - speed[i - 1]
        dv = max(-params.accel_limit * dt, min(params.accel_limit * dt, dv))
        v = speed[i - 1] + dv
        speed[i] = v
        heading[i] = heading[i - 1] + seg.curvature * v * dt
        pitch[i] = math.degrees(math.atan(seg.climb))
        x[i] = x[i - 1] + math.cos(heading[i]) * v * dt
        z[i] = z[i - 1] + math.sin(heading[i]) * v * dt
        y[i] = y[i - 1] + seg.climb * v * dt if game is Game.FLIGHT else 0.0
        s = (s + v * dt) % total
        zone[i] = int(N_ZONES * s / total)

    accel = np.zeros(n_frames)
    accel[1:] = np.diff(speed) / dt
    rot_z = np.mod(np.degrees(heading), 360.0)
    rot_x = np.mod(pitch, 360.0) if game is Game.FLIGHT else np.zeros(n_frames)
    return speed, accel, rot_x, rot_z, x, y, z, zone


# ---------------------------------------------------------------------------
# sampling


def sample_profile(rng: np.random.Generator) -> UserProfile:
    """Draw one participant profile from the documented distribution."""
    return UserProfile(
        gender=str(rng.choice(["female", "male", "other"], p=[0.3, 0.65, 0.05])),
        age=int(rng.integers(18, 61)),
        vr_experience=int(rng.choice([0, 1, 2, 3], p=[0.3, 0.3, 0.25, 0.15])),
        flicker_sensitivity=bool(rng.random() < 0.2),
        pre_symptoms=bool(rng.random() < 0.15),
        wears_glasses=bool(rng.random() < 0.35),
        vision_impairment=bool(rng.random() < 0.15),
        posture="sitting" if rng.random() < 0.8 else "standing",
        dominant_eye="right" if rng.random() < 0.65 else "left",
    )


def sample_config(rng: np.random.Generator) -> GameConfig:
    auto_camera = bool(rng.random() < 0.3)
    level_bound = 2 if auto_camera else 3
    return GameConfig(
        static_rest_frame=bool(rng.random() < 0.5),
        haptic_feedback=bool(rng.random() < 0.5),
        camera_control_level=int(rng.integers(0, level_bound)),
        dof_simulation=bool(rng.random() < 0.5),
        auto_camera=auto_camera,
    )


def _sample_pre_questionnaire(rng: np.random.Generator, profile: UserProfile) -> VRSQReport:
    p = 0.1 + 0.2 * profile_susceptibility(profile)
    scores = rng.binomial(2, p, size=len(VRSQ_SYMPTOMS))
    return VRSQReport(
        phase="pre",
        items=tuple((name, int(s)) for name, s in zip(VRSQ_SYMPTOMS, scores)),
    )


def _post_questionnaire(pre: VRSQReport, trace: RiskTrace) -> VRSQReport:
    bump = (1 if int(trace.levels.max()) >= 2 else 0) + (1 if float(trace.risk.mean()) > 0.6 else 0)
    return VRSQReport(
        phase="post",
        items=tuple((name, min(3, score + bump)) for name, score in pre.items),
    )


# ---------------------------------------------------------------------------
# generation


def generate_session(
    game: Game,
    seed: int,
    profile: UserProfile,
    config: GameConfig,
    params: SimParams | None = None,
    n_frames: int | None = None,
    session_id: str | None = None,
) -> tuple[SessionRecord, RiskTrace]:
    """Simulate one session; the returned trace is the labeling oracle.

    ``n_frames`` overrides the session length (defaults to the full
    ``params.duration_s``); the risk model always normalizes elapsed time by
    ``params.duration_s`` so shorter sessions simply stop earlier.
    """
    params = params or SimParams()
    game = Game(game)
    if n_frames is None:
        n_frames = int(params.duration_s / params.frame_interval_s) + 1
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    dt = params.frame_interval_s
    timestamps = np.arange(n_frames) * dt
    speed, accel, rot_x, rot_z, x, y, z, zone = _kinematics(game, params, n_frames)

    susceptibility = profile_susceptibility(profile)
    w_time, w_rot, w_acc, w_prof = params.risk_weights
    rate = np.zeros(n_frames)
    for i in range(1, n_frames):
        rate[i] = wrapped_degrees_delta(rot_z[i], rot_z[i - 1]) / dt
    risk = np.clip(
        w_time * (timestamps / params.duration_s)
        + w_rot * np.minimum(np.abs(rate) / params.rotation_ref_dps, 1.0)
        + w_acc * np.minimum(np.abs(accel) / params.accel_ref, 1.0)
        + w_prof * susceptibility,
        0.0,
        1.0,
    )
    t1, t2, t3 = params.thresholds
    levels = np.digitize(risk, [t1, t2, t3]).astype(np.int64)

    rng = rng_from(seed, "session")
    reports = rng.random(n_frames) < params.report_prob
    reports[0] = True

    rng_q = rng_from(seed, "questionnaire")
    pre = _sample_pre_questionnaire(rng_q, profile)
    trace = RiskTrace(timestamps=timestamps, risk=risk, levels=levels)

    fov = float(rng_q.choice([70.0, 80.0, 90.0, 100.0, 110.0]))
    frame_rate = float(rng_q.choice([72.0, 80.0, 90.0]))
    frames = tuple(
        TelemetryFrame(
            timestamp=float(timestamps[i]),
            speed=float(speed[i]),
            acceleration=float(accel[i]),
            rotation_x=float(rot_x[i]),
            rotation_y=0.0,
            rotation_z=float(rot_z[i]),
            position_x=float(x[i]),
            position_y=float(y[i]),
            position_z=float(z[i]),
            region_of_interest=int(zone[i]),
            fov_size=fov,
            frame_rate=frame_rate,
            reported_discomfort=int(levels[i]) if reports[i] else None,
        )
        for i in range(n_frames)
    )
    session = SessionRecord(
        session_id=session_id or f"{game.value}-{seed:016x}",
        game=game,
        profile=profile,
        pre_questionnaire=pre,
        post_questionnaire=_post_questionnaire(pre, trace),
        config=config,
        frames=frames,
    )
    return session, trace


def _frame_counts(target_rows: int, rng: np.random.Generator, max_frames: int) -> list[int]:
    lo, min_last = 130, 30
    counts: list[int] = []
    remaining = target_rows
    while remaining > max_frames:
        n = int(rng.integers(lo, max_frames + 1))
        if remaining - n < min_last:
            n = remaining - min_last
        counts.append(n)
        remaining -= n
    counts.append(remaining)
    return counts


def generate_corpus(
    counts: Mapping[str, int],
    seed: int,
    params: SimParams | None = None,
    unit: str = "sessions",
    profile_overrides: Mapping[str, object] | None = None,
) -> tuple[list[SessionRecord], list[RiskTrace]]:
    """Generate a multi-session corpus, seeded and reproducible.

    ``counts`` maps game name -> session count (``unit="sessions"``) or
    game name -> target assembled row count (``unit="rows"``); row mode
    lands exactly on the target by sizing the final session.
    """
    if unit not in ("sessions", "rows"):
        raise ValueError("unit must be 'sessions' or 'rows'")
    params = params or SimParams()
    max_frames = int(params.duration_s / params.frame_interval_s) + 1
    sessions: list[SessionRecord] = []
    traces: list[RiskTrace] = []
    for game_name in sorted(counts):
        game = Game(game_name)
        count = counts[game_name]
        if count < 1:
            raise ValueError(f"count for {game_name!r} must be >= 1")
        if unit == "rows":
            frame_plan = _frame_counts(count, rng_from(seed, game.value, "sizes"), max_frames)
        else:
            frame_plan = [max_frames] * count
        for i, n_frames in enumerate(frame_plan):
            who = rng_from(seed, game.value, i, "participant")
            profile = sample_profile(who)
            if profile_overrides:
                profile = replace(profile, **profile_overrides)  # type: ignore[arg-type]
            config = sample_config(who)
            session, trace = generate_session(
                game,
                seed=derive_seed(seed, game.value, i),
                profile=profile,
                config=config,
                params=params,
                n_frames=n_frames,
                session_id=f"{game.value}-{i:04d}",
            )
            sessions.append(session)
            traces.append(trace)
    return sessions, traces


#: Row targets for the default corpus (per-scenario sample sizes).
DEFAULT_ROW_TARGETS: dict[str, int] = {"race": 3993, "flight": 5397}


def default_corpus(
    seed: int, params: SimParams | None = None
) -> tuple[list[SessionRecord], list[RiskTrace]]:
    """The standard benchmark corpus: 3993 race rows + 5397 flight rows."""
    return generate_corpus(DEFAULT_ROW_TARGETS, seed=seed, params=params, unit="rows")


def risk_trace_csv(sessions: Sequence[SessionRecord], traces: Sequence[RiskTrace]) -> bytes:
    """Sidecar CSV of the latent oracle, one row per frame."""
    lines = ["session_id,timestamp,risk,latent_level"]
    for session, trace in zip(sessions, traces):
        for t, r, level in zip(trace.timestamps, trace.risk, trace.levels):
            lines.append(f"{session.session_id},{float(t)!r},{float(r)!r},{int(level)}")
    return ("\n".join(lines) + "\n").encode("utf-8")
