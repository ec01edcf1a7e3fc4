"""Canonical attribute registry, label schemes, and scenario definitions.

The 34-attribute registry below is the single source of truth for feature
order everywhere in the toolkit: dataset assembly, learner inputs, attribute
ranking, and the serve protocol all index into it. The grouping
(9 profile + 8 pre-play symptom scores + 12 telemetry scalars + 5 config
flags = 34) is this toolkit's canonical definition; files that disagree
with it are rejected rather than reconciled.
"""

from __future__ import annotations

import difflib
import hashlib
from dataclasses import dataclass
from enum import Enum, IntEnum


class DiscomfortLevel(IntEnum):
    """Ordinal self-reported discomfort, totally ordered none < severe."""

    NONE = 0
    SLIGHT = 1
    MODERATE = 2
    SEVERE = 3


class Game(str, Enum):
    RACE = "race"
    FLIGHT = "flight"


class LabelScheme(str, Enum):
    """Target coding: the full 4-level scale or its binary collapse."""

    BINARY = "binary"
    QUARTERLY = "quarterly"

    @property
    def n_classes(self) -> int:
        return 2 if self is LabelScheme.BINARY else 4


class Scenario(str, Enum):
    """Which game(s) a dataset draws from: A=race, B=flight, C=both."""

    A = "A"
    B = "B"
    C = "C"

    @property
    def games(self) -> frozenset[Game]:
        if self is Scenario.A:
            return frozenset({Game.RACE})
        if self is Scenario.B:
            return frozenset({Game.FLIGHT})
        return frozenset({Game.RACE, Game.FLIGHT})


class AttributeGroup(str, Enum):
    PROFILE = "profile"
    QUESTIONNAIRE = "questionnaire"
    GAME = "game"
    CONFIG = "config"


class AttributeKind(str, Enum):
    NUMERIC = "numeric"
    ORDINAL = "ordinal"
    BOOLEAN = "boolean"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class AttributeEntry:
    name: str
    group: AttributeGroup
    kind: AttributeKind


_P = AttributeGroup.PROFILE
_Q = AttributeGroup.QUESTIONNAIRE
_G = AttributeGroup.GAME
_C = AttributeGroup.CONFIG
_NUM = AttributeKind.NUMERIC
_ORD = AttributeKind.ORDINAL
_BOOL = AttributeKind.BOOLEAN
_CAT = AttributeKind.CATEGORICAL

#: Canonical pre-play symptom names, in fixed order (8 items, scored 0-3).
VRSQ_SYMPTOMS: tuple[str, ...] = (
    "general_discomfort",
    "fatigue",
    "eyestrain",
    "difficulty_focusing",
    "headache",
    "fullness_of_head",
    "blurred_vision",
    "dizziness",
)

REGISTRY: tuple[AttributeEntry, ...] = (
    # profile (9)
    AttributeEntry("gender", _P, _CAT),
    AttributeEntry("age", _P, _NUM),
    AttributeEntry("vr_experience", _P, _ORD),
    AttributeEntry("flicker_sensitivity", _P, _BOOL),
    AttributeEntry("pre_symptoms", _P, _BOOL),
    AttributeEntry("wears_glasses", _P, _BOOL),
    AttributeEntry("vision_impairment", _P, _BOOL),
    AttributeEntry("posture", _P, _CAT),
    AttributeEntry("dominant_eye", _P, _CAT),
    # questionnaire: pre-phase symptom scores (8)
    *(AttributeEntry(name, _Q, _ORD) for name in VRSQ_SYMPTOMS),
    # game telemetry (12); the reported discomfort level is the class, never a feature
    AttributeEntry("timestamp", _G, _NUM),
    AttributeEntry("speed", _G, _NUM),
    AttributeEntry("acceleration", _G, _NUM),
    AttributeEntry("rotation_x", _G, _NUM),
    AttributeEntry("rotation_y", _G, _NUM),
    AttributeEntry("rotation_z", _G, _NUM),
    AttributeEntry("position_x", _G, _NUM),
    AttributeEntry("position_y", _G, _NUM),
    AttributeEntry("position_z", _G, _NUM),
    AttributeEntry("region_of_interest", _G, _CAT),
    AttributeEntry("fov_size", _G, _NUM),
    AttributeEntry("frame_rate", _G, _NUM),
    # game configuration (5)
    AttributeEntry("static_rest_frame", _C, _BOOL),
    AttributeEntry("haptic_feedback", _C, _BOOL),
    AttributeEntry("camera_control_level", _C, _ORD),
    AttributeEntry("dof_simulation", _C, _BOOL),
    AttributeEntry("auto_camera", _C, _BOOL),
)

N_ATTRIBUTES = len(REGISTRY)
assert N_ATTRIBUTES == 34

ATTRIBUTE_NAMES: tuple[str, ...] = tuple(entry.name for entry in REGISTRY)

_INDEX: dict[str, int] = {entry.name: i for i, entry in enumerate(REGISTRY)}

# Fixed numeric codings for non-numeric attributes; learners only ever see
# a uniform numeric matrix.
GENDER_CODES: dict[str, int] = {"female": 0, "male": 1, "other": 2}
POSTURE_CODES: dict[str, int] = {"sitting": 0, "standing": 1}
EYE_CODES: dict[str, int] = {"left": 0, "right": 1}

GENDER_DECODE: dict[int, str] = {v: k for k, v in GENDER_CODES.items()}
POSTURE_DECODE: dict[int, str] = {v: k for k, v in POSTURE_CODES.items()}
EYE_DECODE: dict[int, str] = {v: k for k, v in EYE_CODES.items()}


def attribute_index(name: str) -> int:
    """Position of ``name`` in the fixed registry order.

    Unknown names raise a KeyError naming the closest valid attribute.
    """
    try:
        return _INDEX[name]
    except KeyError:
        close = difflib.get_close_matches(name, ATTRIBUTE_NAMES, n=1, cutoff=0.0)
        hint = f"; closest valid attribute is {close[0]!r}" if close else ""
        raise KeyError(f"unknown attribute {name!r}{hint}") from None


def registry_checksum() -> str:
    """Stable hex digest of the registry; models pin this at fit time."""
    payload = "\n".join(f"{e.name}|{e.group.value}|{e.kind.value}" for e in REGISTRY)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def collapse_label(level: int, scheme: LabelScheme) -> int:
    """Map a 0-3 discomfort level to a class index under ``scheme``.

    Quarterly is the identity; binary merges slight/moderate/severe into 1.
    """
    if level not in (0, 1, 2, 3):
        raise ValueError(f"discomfort level must be in 0..3, got {level!r}")
    if scheme is LabelScheme.QUARTERLY:
        return int(level)
    return 0 if level == 0 else 1
