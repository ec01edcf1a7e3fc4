"""Cause/strategy knowledge base and mitigation suggestions.

A fixed 19-strategy x 10-cause boolean matrix records which mitigation
techniques address which discomfort causes. Cause inference bridges an
attribute ranking to that matrix through an editable attribute -> cause
mapping (shipped default in ``assets/cause_map.cfg``); advice is emitted
only when the predicted discomfort probability clears a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np


class Cause(IntEnum):
    LOCOMOTION = 1
    ACCELERATION = 2
    FIELD_OF_VIEW = 3
    DEPTH_OF_FIELD = 4
    DEGREE_OF_CONTROL = 5
    EXPOSURE = 6
    LATENCY = 7
    STATIC_REST_FRAME = 8
    CAMERA_ROTATION = 9
    POSTURAL_INSTABILITY = 10

    @property
    def label(self) -> str:
        return _CAUSE_LABELS[self]


_CAUSE_LABELS: dict[Cause, str] = {
    Cause.LOCOMOTION: "Locomotion",
    Cause.ACCELERATION: "Acceleration",
    Cause.FIELD_OF_VIEW: "FieldOfView",
    Cause.DEPTH_OF_FIELD: "DepthOfField",
    Cause.DEGREE_OF_CONTROL: "DegreeOfControl",
    Cause.EXPOSURE: "Exposure",
    Cause.LATENCY: "Latency",
    Cause.STATIC_REST_FRAME: "StaticRestFrame",
    Cause.CAMERA_ROTATION: "CameraRotation",
    Cause.POSTURAL_INSTABILITY: "PosturalInstability",
}

_CAUSE_BY_LABEL: dict[str, Cause] = {label: cause for cause, label in _CAUSE_LABELS.items()}


def cause_from_label(label: str) -> Cause:
    try:
        return _CAUSE_BY_LABEL[label]
    except KeyError:
        raise KeyError(f"unknown cause {label!r}; valid: {sorted(_CAUSE_BY_LABEL)}") from None


#: The 19 mitigation strategies, in fixed row order.
STRATEGIES: tuple[str, ...] = (
    "Teleporting",
    "Tunneling",
    "MotionWalk",
    "HapticFeedback",
    "AccelerationChanges",
    "Headlock",
    "Holosphere",
    "TrajectoryVisualization",
    "RotationalBlur",
    "DoFSimulation",
    "LatencyCameraWarping",
    "CabinStaticFrame",
    "Slowmotion",
    "DynamicFoV",
    "DynamicVignetting",
    "AmplifiedMovements",
    "Blur",
    "Interval",
    "PhysiologicalSignalsObservation",
)

# Strategy -> set of cause ids it addresses.
_MATRIX_ROWS: dict[str, frozenset[int]] = {
    "Teleporting": frozenset({1}),
    "Tunneling": frozenset({1}),
    "MotionWalk": frozenset({1}),
    "HapticFeedback": frozenset({2}),
    "AccelerationChanges": frozenset({2}),
    "Headlock": frozenset({5}),
    "Holosphere": frozenset({1}),
    "TrajectoryVisualization": frozenset({1}),
    "RotationalBlur": frozenset({1, 9}),
    "DoFSimulation": frozenset({4}),
    "LatencyCameraWarping": frozenset({7}),
    "CabinStaticFrame": frozenset({8}),
    "Slowmotion": frozenset({2, 9}),
    "DynamicFoV": frozenset({3}),
    "DynamicVignetting": frozenset({1, 3}),
    "AmplifiedMovements": frozenset({9}),
    "Blur": frozenset({1, 2, 3, 4, 9}),
    "Interval": frozenset({6}),
    "PhysiologicalSignalsObservation": frozenset({10}),
}


@dataclass(frozen=True)
class CauseStrategyMatrix:
    """19 x 10 boolean grid: cell(strategy, cause) = strategy addresses cause."""

    cells: tuple[tuple[bool, ...], ...]

    def cell(self, strategy: str, cause: Cause) -> bool:
        return self.cells[STRATEGIES.index(strategy)][cause - 1]

    def strategies_for(self, cause: Cause) -> tuple[str, ...]:
        return tuple(s for i, s in enumerate(STRATEGIES) if self.cells[i][cause - 1])

    def true_cell_count(self) -> int:
        return sum(sum(row) for row in self.cells)

    def to_csv(self) -> bytes:
        lines = ["strategy," + ",".join(c.label for c in Cause)]
        for i, strategy in enumerate(STRATEGIES):
            lines.append(strategy + "," + ",".join("x" if v else "" for v in self.cells[i]))
        return ("\n".join(lines) + "\n").encode("utf-8")


def builtin_matrix() -> CauseStrategyMatrix:
    """The built-in mitigation knowledge matrix (26 true cells)."""
    cells = tuple(
        tuple(cause_id in _MATRIX_ROWS[strategy] for cause_id in range(1, 11))
        for strategy in STRATEGIES
    )
    return CauseStrategyMatrix(cells=cells)


def strategies_for(cause: Cause, matrix: CauseStrategyMatrix | None = None) -> tuple[str, ...]:
    """All strategies addressing ``cause``, in fixed row order."""
    return (matrix or builtin_matrix()).strategies_for(cause)


# ---------------------------------------------------------------------------
# attribute -> cause mapping


def _parse_cause_map(text: str) -> dict[str, Cause]:
    mapping: dict[str, Cause] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'attribute = Cause'")
        attribute, _, label = line.partition("=")
        mapping[attribute.strip()] = cause_from_label(label.strip())
    return mapping


def default_cause_map() -> dict[str, Cause]:
    """The shipped attribute -> cause mapping (assets/cause_map.cfg)."""
    text = resources.files("cybersick").joinpath("assets/cause_map.cfg").read_text("utf-8")
    return _parse_cause_map(text)


def load_cause_map(path: str) -> dict[str, Cause]:
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_cause_map(fh.read())


@dataclass(frozen=True)
class CauseFinding:
    cause: Cause
    evidence: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Suggestion:
    cause: Cause
    strategies: tuple[str, ...]
    evidence: tuple[tuple[str, str], ...]

    def to_dict(self) -> dict:
        return {
            "cause": self.cause.label,
            "strategies": list(self.strategies),
            "evidence": [[name, note] for name, note in self.evidence],
        }


def infer_causes(
    ranking,
    frame_stats: Mapping[str, float] | None = None,
    top_n: int = 5,
    cause_map: Mapping[str, Cause] | None = None,
) -> list[CauseFinding]:
    """Map the top-ranked attributes to causes, deduplicated in hit order.

    Attributes without a mapped cause (profile and symptom scores, mostly)
    still contribute evidence notes but no cause. ``frame_stats`` values,
    when given, are folded into the evidence notes.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    if top_n > len(ranking.entries):
        import warnings

        warnings.warn(f"top_n clamped to the {len(ranking.entries)} ranked attributes")
        top_n = len(ranking.entries)
    mapping = dict(cause_map) if cause_map is not None else default_cause_map()
    found: dict[Cause, list[tuple[str, str]]] = {}
    order: list[Cause] = []
    for entry in ranking.entries[:top_n]:
        note = f"rank impact {entry.impact:+.4f}"
        if frame_stats and entry.name in frame_stats:
            note += f"; session mean {frame_stats[entry.name]:.3f}"
        cause = mapping.get(entry.name)
        if cause is None:
            continue
        if cause not in found:
            found[cause] = []
            order.append(cause)
        found[cause].append((entry.name, note))
    return [CauseFinding(cause=c, evidence=tuple(found[c])) for c in order]


def discomfort_probability(distribution: Sequence[float]) -> float:
    """P(any discomfort) = 1 - P(class 0), for either scheme."""
    return float(1.0 - distribution[0])


def advise(
    distribution: Sequence[float],
    causes: Iterable[Cause | CauseFinding],
    threshold: float = 0.5,
    matrix: CauseStrategyMatrix | None = None,
) -> list[Suggestion]:
    """One Suggestion per cause when predicted discomfort clears threshold."""
    probs = np.asarray(distribution, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 2 or abs(probs.sum() - 1.0) > 1e-6 or (probs < 0).any():
        raise ValueError("distribution must be a valid probability vector")
    if discomfort_probability(probs) <= threshold:
        return []
    matrix = matrix or builtin_matrix()
    suggestions = []
    for item in causes:
        if isinstance(item, CauseFinding):
            cause, evidence = item.cause, item.evidence
        else:
            cause, evidence = item, ()
        suggestions.append(
            Suggestion(cause=cause, strategies=matrix.strategies_for(cause), evidence=evidence)
        )
    return suggestions
