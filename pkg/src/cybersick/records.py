"""Immutable session domain types, validation, and numeric encoding.

Everything here is a frozen value object: safe to share across threads and
to reuse between datasets. Validation never raises on bad field values:
violations are data, collected into a report with the offending field and
frame index so callers can surface all problems at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .registry import (
    EYE_CODES,
    GENDER_CODES,
    POSTURE_CODES,
    Game,
    VRSQ_SYMPTOMS,
)


@dataclass(frozen=True)
class UserProfile:
    gender: str
    age: int
    vr_experience: int
    flicker_sensitivity: bool
    pre_symptoms: bool
    wears_glasses: bool
    vision_impairment: bool
    posture: str
    dominant_eye: str


@dataclass(frozen=True)
class VRSQReport:
    """Eight symptom scores (0-3), phase 'pre' or 'post'."""

    phase: str
    items: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class TelemetryFrame:
    timestamp: float
    speed: float
    acceleration: float
    rotation_x: float
    rotation_y: float
    rotation_z: float
    position_x: float
    position_y: float
    position_z: float
    region_of_interest: int
    fov_size: float
    frame_rate: float
    reported_discomfort: int | None = None


@dataclass(frozen=True)
class GameConfig:
    static_rest_frame: bool
    haptic_feedback: bool
    camera_control_level: int
    dof_simulation: bool
    auto_camera: bool


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    game: Game
    profile: UserProfile
    pre_questionnaire: VRSQReport
    post_questionnaire: VRSQReport | None
    config: GameConfig
    frames: tuple[TelemetryFrame, ...]


@dataclass(frozen=True)
class Violation:
    field: str
    message: str
    frame: int | None = None

    def __str__(self) -> str:
        where = f" (frame {self.frame})" if self.frame is not None else ""
        return f"{self.field}{where}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_profile(profile: UserProfile) -> Iterator[Violation]:
    if profile.gender not in GENDER_CODES:
        yield Violation("gender", f"must be one of {sorted(GENDER_CODES)}")
    if not isinstance(profile.age, int) or profile.age < 13:
        yield Violation("age", "must be an integer >= 13")
    if profile.vr_experience not in (0, 1, 2, 3):
        yield Violation("vr_experience", "must be in 0..3")
    if profile.posture not in POSTURE_CODES:
        yield Violation("posture", f"must be one of {sorted(POSTURE_CODES)}")
    if profile.dominant_eye not in EYE_CODES:
        yield Violation("dominant_eye", f"must be one of {sorted(EYE_CODES)}")


def _check_questionnaire(report: VRSQReport, expected_phase: str, prefix: str) -> Iterator[Violation]:
    if report.phase != expected_phase:
        yield Violation(f"{prefix}.phase", f"must be {expected_phase!r}, got {report.phase!r}")
    names = tuple(name for name, _ in report.items)
    if names != VRSQ_SYMPTOMS:
        yield Violation(f"{prefix}.items", "symptom names must match the canonical 8 names in order")
    for name, score in report.items:
        if score not in (0, 1, 2, 3):
            yield Violation(f"{prefix}.{name}", "score must be in 0..3")


def _check_frame(frame: TelemetryFrame, index: int) -> Iterator[Violation]:
    if frame.timestamp < 0:
        yield Violation("timestamp", "must be non-negative", index)
    if not 0 < frame.fov_size <= 180:
        yield Violation("fov_size", "must be in (0, 180]", index)
    if frame.frame_rate <= 0:
        yield Violation("frame_rate", "must be positive", index)
    for axis in ("rotation_x", "rotation_y", "rotation_z"):
        value = getattr(frame, axis)
        if not 0 <= value < 360:
            yield Violation(axis, "must be in [0, 360)", index)
    if frame.region_of_interest < 0:
        yield Violation("region_of_interest", "must be a zone id >= 0", index)
    if frame.reported_discomfort is not None and frame.reported_discomfort not in (0, 1, 2, 3):
        yield Violation("reported_discomfort", "must be in 0..3 when present", index)


def validate_session(record: SessionRecord) -> ValidationReport:
    """Collect every invariant violation in ``record``; ok iff none."""
    violations: list[Violation] = []
    if record.game not in (Game.RACE, Game.FLIGHT):
        violations.append(Violation("game", "must be 'race' or 'flight'"))
    violations.extend(_check_profile(record.profile))
    violations.extend(_check_questionnaire(record.pre_questionnaire, "pre", "pre_questionnaire"))
    if record.post_questionnaire is not None:
        violations.extend(_check_questionnaire(record.post_questionnaire, "post", "post_questionnaire"))
    config = record.config
    if config.camera_control_level not in (0, 1, 2):
        violations.append(Violation("camera_control_level", "must be in 0..2"))
    if config.auto_camera and config.camera_control_level >= 2:
        violations.append(Violation("auto_camera", "auto camera requires camera_control_level < 2"))
    if not record.frames:
        violations.append(Violation("frames", "session must contain at least one frame"))
    previous = None
    for i, frame in enumerate(record.frames):
        violations.extend(_check_frame(frame, i))
        if previous is not None and frame.timestamp <= previous:
            violations.append(Violation("timestamp", "timestamp order: must strictly increase", i))
        previous = frame.timestamp
    return ValidationReport(tuple(violations))


def profile_values(profile: UserProfile) -> list[float]:
    """Encode the 9 profile attributes in registry order."""
    return [
        float(GENDER_CODES[profile.gender]),
        float(profile.age),
        float(profile.vr_experience),
        float(profile.flicker_sensitivity),
        float(profile.pre_symptoms),
        float(profile.wears_glasses),
        float(profile.vision_impairment),
        float(POSTURE_CODES[profile.posture]),
        float(EYE_CODES[profile.dominant_eye]),
    ]


def questionnaire_values(report: VRSQReport) -> list[float]:
    """Encode the 8 pre-phase symptom scores in registry order."""
    return [float(score) for _, score in report.items]


def frame_values(frame: TelemetryFrame) -> list[float]:
    """Encode the 12 telemetry attributes; the reported level is excluded."""
    return [
        frame.timestamp,
        frame.speed,
        frame.acceleration,
        frame.rotation_x,
        frame.rotation_y,
        frame.rotation_z,
        frame.position_x,
        frame.position_y,
        frame.position_z,
        float(frame.region_of_interest),
        frame.fov_size,
        frame.frame_rate,
    ]


def config_values(config: GameConfig) -> list[float]:
    """Encode the 5 configuration attributes in registry order."""
    return [
        float(config.static_rest_frame),
        float(config.haptic_feedback),
        float(config.camera_control_level),
        float(config.dof_simulation),
        float(config.auto_camera),
    ]


def encode_frame_vector(
    profile: UserProfile,
    questionnaire: VRSQReport,
    config: GameConfig,
    frame: TelemetryFrame,
) -> list[float]:
    """Assemble one full 34-value row in registry order."""
    return (
        profile_values(profile)
        + questionnaire_values(questionnaire)
        + frame_values(frame)
        + config_values(config)
    )
