"""Session parsing, labeled feature assembly, and cross-validation folds.

Two interchange formats are supported (see docs/data-format.md):

* session JSONL: one JSON object per line, one line per session, field
  names exactly matching the record types, frames as an array;
* flat CSV: one assembled feature row per line, header of the 34 registry
  names plus ``label``, ``session_id``, ``timestamp``.

Labels come from the in-game discomfort reports: the most recent report is
carried forward, and frames before the first report count as level 0.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, replace

import numpy as np

from .records import (
    GameConfig,
    SessionRecord,
    TelemetryFrame,
    UserProfile,
    VRSQReport,
    encode_frame_vector,
    validate_session,
)
from .registry import (
    ATTRIBUTE_NAMES,
    EYE_DECODE,
    GENDER_DECODE,
    N_ATTRIBUTES,
    POSTURE_DECODE,
    VRSQ_SYMPTOMS,
    Game,
    LabelScheme,
    Scenario,
    collapse_label,
)
from .seeding import rng_from


class DataError(ValueError):
    """Malformed input data; carries a human-readable location."""


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    label: int
    session_id: str
    frame_timestamp: float


@dataclass(frozen=True)
class ClassDistribution:
    counts: tuple[int, ...]
    proportions: tuple[float, ...]


@dataclass(frozen=True)
class Dataset:
    """Assembled feature matrix plus row provenance.

    ``attribute_names`` is normally the 34-name registry order; ranking
    experiments may widen it via :meth:`with_column`.
    """

    scheme: LabelScheme
    scenario: Scenario
    attribute_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    session_ids: tuple[str, ...]
    timestamps: np.ndarray
    provenance: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_attributes(self) -> int:
        return int(self.X.shape[1])

    def row(self, i: int) -> FeatureVector:
        return FeatureVector(
            values=tuple(float(v) for v in self.X[i]),
            label=int(self.y[i]),
            session_id=self.session_ids[i],
            frame_timestamp=float(self.timestamps[i]),
        )

    def subset(self, indices: np.ndarray) -> "Dataset":
        return replace(
            self,
            X=self.X[indices],
            y=self.y[indices],
            session_ids=tuple(self.session_ids[int(i)] for i in indices),
            timestamps=self.timestamps[indices],
        )

    def with_column(self, name: str, values: np.ndarray) -> "Dataset":
        """Append an extra attribute column (for ranking experiments)."""
        if name in self.attribute_names:
            raise ValueError(f"attribute {name!r} already present")
        if len(values) != self.n_rows:
            raise ValueError("column length must match row count")
        return replace(
            self,
            attribute_names=self.attribute_names + (name,),
            X=np.column_stack([self.X, np.asarray(values, dtype=np.float64)]),
        )


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments != fold)[0]


# ---------------------------------------------------------------------------
# session JSONL


def _profile_to_dict(profile: UserProfile) -> dict:
    return {
        "gender": profile.gender,
        "age": profile.age,
        "vr_experience": profile.vr_experience,
        "flicker_sensitivity": profile.flicker_sensitivity,
        "pre_symptoms": profile.pre_symptoms,
        "wears_glasses": profile.wears_glasses,
        "vision_impairment": profile.vision_impairment,
        "posture": profile.posture,
        "dominant_eye": profile.dominant_eye,
    }


def _questionnaire_to_dict(report: VRSQReport) -> dict:
    return {"phase": report.phase, "items": [[name, score] for name, score in report.items]}


def _frame_to_dict(frame: TelemetryFrame) -> dict:
    out = {
        "timestamp": frame.timestamp,
        "speed": frame.speed,
        "acceleration": frame.acceleration,
        "rotation_x": frame.rotation_x,
        "rotation_y": frame.rotation_y,
        "rotation_z": frame.rotation_z,
        "position_x": frame.position_x,
        "position_y": frame.position_y,
        "position_z": frame.position_z,
        "region_of_interest": frame.region_of_interest,
        "fov_size": frame.fov_size,
        "frame_rate": frame.frame_rate,
    }
    if frame.reported_discomfort is not None:
        out["reported_discomfort"] = frame.reported_discomfort
    return out


def session_to_dict(session: SessionRecord) -> dict:
    out = {
        "session_id": session.session_id,
        "game": session.game.value,
        "profile": _profile_to_dict(session.profile),
        "pre_questionnaire": _questionnaire_to_dict(session.pre_questionnaire),
    }
    if session.post_questionnaire is not None:
        out["post_questionnaire"] = _questionnaire_to_dict(session.post_questionnaire)
    out["config"] = {
        "static_rest_frame": session.config.static_rest_frame,
        "haptic_feedback": session.config.haptic_feedback,
        "camera_control_level": session.config.camera_control_level,
        "dof_simulation": session.config.dof_simulation,
        "auto_camera": session.config.auto_camera,
    }
    out["frames"] = [_frame_to_dict(frame) for frame in session.frames]
    return out


_PROFILE_FIELDS = frozenset(_profile_to_dict(UserProfile("male", 20, 0, False, False, False, False, "sitting", "right")))
_FRAME_FIELDS = frozenset(
    _frame_to_dict(TelemetryFrame(0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 90, 72, 0))
)
_CONFIG_FIELDS = frozenset({"static_rest_frame", "haptic_feedback", "camera_control_level", "dof_simulation", "auto_camera"})
_SESSION_FIELDS = frozenset(
    {"session_id", "game", "profile", "pre_questionnaire", "post_questionnaire", "config", "frames"}
)


def _reject_unknown(obj: dict, allowed: frozenset[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise DataError(f"{where}: unknown field(s) {sorted(unknown)}")


def _questionnaire_from_dict(obj: dict, where: str) -> VRSQReport:
    _reject_unknown(obj, frozenset({"phase", "items"}), where)
    try:
        items = tuple((str(name), int(score)) for name, score in obj["items"])
        return VRSQReport(phase=str(obj["phase"]), items=items)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{where}: {exc}") from exc


def dict_to_session(obj: dict, where: str = "session") -> SessionRecord:
    _reject_unknown(obj, _SESSION_FIELDS, where)
    try:
        profile_obj = obj["profile"]
        _reject_unknown(profile_obj, _PROFILE_FIELDS, f"{where}.profile")
        profile = UserProfile(
            gender=str(profile_obj["gender"]),
            age=int(profile_obj["age"]),
            vr_experience=int(profile_obj["vr_experience"]),
            flicker_sensitivity=bool(profile_obj["flicker_sensitivity"]),
            pre_symptoms=bool(profile_obj["pre_symptoms"]),
            wears_glasses=bool(profile_obj["wears_glasses"]),
            vision_impairment=bool(profile_obj["vision_impairment"]),
            posture=str(profile_obj["posture"]),
            dominant_eye=str(profile_obj["dominant_eye"]),
        )
        config_obj = obj["config"]
        _reject_unknown(config_obj, _CONFIG_FIELDS, f"{where}.config")
        config = GameConfig(
            static_rest_frame=bool(config_obj["static_rest_frame"]),
            haptic_feedback=bool(config_obj["haptic_feedback"]),
            camera_control_level=int(config_obj["camera_control_level"]),
            dof_simulation=bool(config_obj["dof_simulation"]),
            auto_camera=bool(config_obj["auto_camera"]),
        )
        frames = []
        for i, frame_obj in enumerate(obj["frames"]):
            _reject_unknown(frame_obj, _FRAME_FIELDS | {"reported_discomfort"}, f"{where}.frames[{i}]")
            reported = frame_obj.get("reported_discomfort")
            frames.append(
                TelemetryFrame(
                    timestamp=float(frame_obj["timestamp"]),
                    speed=float(frame_obj["speed"]),
                    acceleration=float(frame_obj["acceleration"]),
                    rotation_x=float(frame_obj["rotation_x"]),
                    rotation_y=float(frame_obj["rotation_y"]),
                    rotation_z=float(frame_obj["rotation_z"]),
                    position_x=float(frame_obj["position_x"]),
                    position_y=float(frame_obj["position_y"]),
                    position_z=float(frame_obj["position_z"]),
                    region_of_interest=int(frame_obj["region_of_interest"]),
                    fov_size=float(frame_obj["fov_size"]),
                    frame_rate=float(frame_obj["frame_rate"]),
                    reported_discomfort=None if reported is None else int(reported),
                )
            )
        post = obj.get("post_questionnaire")
        return SessionRecord(
            session_id=str(obj["session_id"]),
            game=Game(obj["game"]),
            profile=profile,
            pre_questionnaire=_questionnaire_from_dict(obj["pre_questionnaire"], f"{where}.pre_questionnaire"),
            post_questionnaire=None if post is None else _questionnaire_from_dict(post, f"{where}.post_questionnaire"),
            config=config,
            frames=tuple(frames),
        )
    except DataError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{where}: {exc}") from exc


def sessions_to_jsonl(sessions: list[SessionRecord]) -> bytes:
    lines = [json.dumps(session_to_dict(s), separators=(",", ":")) for s in sessions]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def _validate_or_raise(session: SessionRecord, where: str) -> SessionRecord:
    report = validate_session(session)
    if not report.ok:
        first = report.violations[0]
        raise DataError(f"{where}: session {session.session_id!r} invalid: {first}")
    return session


def _parse_jsonl(text: str) -> list[SessionRecord]:
    sessions = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
        session = dict_to_session(obj, where=f"line {lineno}")
        sessions.append(_validate_or_raise(session, f"line {lineno}"))
    return sessions


# ---------------------------------------------------------------------------
# flat CSV

CSV_HEADER: tuple[str, ...] = ATTRIBUTE_NAMES + ("label", "session_id", "timestamp")


def dataset_to_csv(dataset: Dataset) -> bytes:
    buf = io.StringIO()
    buf.write(",".join(dataset.attribute_names + ("label", "session_id", "timestamp")))
    buf.write("\n")
    for i in range(dataset.n_rows):
        values = [repr(float(v)) for v in dataset.X[i]]
        values.append(str(int(dataset.y[i])))
        values.append(dataset.session_ids[i])
        values.append(repr(float(dataset.timestamps[i])))
        buf.write(",".join(values))
        buf.write("\n")
    return buf.getvalue().encode("utf-8")


def _decode_csv_rows(text: str) -> tuple[list[list[float]], list[int], list[str], list[float]]:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        return [], [], [], []
    header = tuple(lines[0].split(","))
    if header != CSV_HEADER:
        expected = set(CSV_HEADER)
        unknown = [c for c in header if c not in expected]
        if unknown:
            raise DataError(f"line 1: unknown attribute column(s) {unknown}")
        raise DataError("line 1: header must be the 34 registry names + label,session_id,timestamp in order")
    values, labels, sids, stamps = [], [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(CSV_HEADER):
            raise DataError(f"line {lineno}: expected {len(CSV_HEADER)} columns, got {len(cells)}")
        try:
            values.append([float(c) for c in cells[:N_ATTRIBUTES]])
            labels.append(int(cells[N_ATTRIBUTES]))
            sids.append(cells[N_ATTRIBUTES + 1])
            stamps.append(float(cells[N_ATTRIBUTES + 2]))
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
    return values, labels, sids, stamps


def _sessions_from_csv(text: str) -> list[SessionRecord]:
    # Reconstruction: rows grouped by session_id in file order; the label
    # column becomes each frame's reported level (propagation-idempotent).
    values, labels, sids, stamps = _decode_csv_rows(text)
    sessions: list[SessionRecord] = []
    order: list[str] = []
    groups: dict[str, list[int]] = {}
    for i, sid in enumerate(sids):
        if sid not in groups:
            groups[sid] = []
            order.append(sid)
        groups[sid].append(i)

    def decode_one(sid: str, rows: list[int]) -> SessionRecord:
        head = values[rows[0]]
        profile = UserProfile(
            gender=GENDER_DECODE[int(round(head[0]))],
            age=int(round(head[1])),
            vr_experience=int(round(head[2])),
            flicker_sensitivity=bool(round(head[3])),
            pre_symptoms=bool(round(head[4])),
            wears_glasses=bool(round(head[5])),
            vision_impairment=bool(round(head[6])),
            posture=POSTURE_DECODE[int(round(head[7]))],
            dominant_eye=EYE_DECODE[int(round(head[8]))],
        )
        questionnaire = VRSQReport(
            phase="pre",
            items=tuple((name, int(round(head[9 + j]))) for j, name in enumerate(VRSQ_SYMPTOMS)),
        )
        config = GameConfig(
            static_rest_frame=bool(round(head[29])),
            haptic_feedback=bool(round(head[30])),
            camera_control_level=int(round(head[31])),
            dof_simulation=bool(round(head[32])),
            auto_camera=bool(round(head[33])),
        )
        frames = []
        for r in rows:
            row = values[r]
            frames.append(
                TelemetryFrame(
                    timestamp=row[17],
                    speed=row[18],
                    acceleration=row[19],
                    rotation_x=row[20],
                    rotation_y=row[21],
                    rotation_z=row[22],
                    position_x=row[23],
                    position_y=row[24],
                    position_z=row[25],
                    region_of_interest=int(round(row[26])),
                    fov_size=row[27],
                    frame_rate=row[28],
                    reported_discomfort=labels[r],
                )
            )
        # flat rows carry no game column; infer race unless airborne
        game = Game.FLIGHT if any(abs(f.position_y) > 1e-9 for f in frames) else Game.RACE
        return SessionRecord(
            session_id=sid,
            game=game,
            profile=profile,
            pre_questionnaire=questionnaire,
            post_questionnaire=None,
            config=config,
            frames=tuple(frames),
        )

    for sid in order:
        session = decode_one(sid, groups[sid])
        sessions.append(_validate_or_raise(session, f"session {sid!r}"))
    return sessions


def parse_sessions(source: bytes | str, fmt: str = "jsonl") -> list[SessionRecord]:
    """Parse and validate sessions from JSONL or flat-CSV bytes.

    Aborts with a :class:`DataError` naming the line/field of the first
    problem; a fully parsed list means every session passed validation.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    if fmt == "jsonl":
        return _parse_jsonl(text)
    if fmt == "csv":
        return _sessions_from_csv(text)
    raise ValueError(f"format must be 'jsonl' or 'csv', got {fmt!r}")


# ---------------------------------------------------------------------------
# feature assembly


def propagate_reports(frames: tuple[TelemetryFrame, ...]) -> list[int]:
    """Carry the most recent report forward; level 0 before the first."""
    levels = []
    current = 0
    for frame in frames:
        if frame.reported_discomfort is not None:
            current = int(frame.reported_discomfort)
        levels.append(current)
    return levels


def _scenario_of(sessions: list[SessionRecord]) -> Scenario:
    games = {s.game for s in sessions}
    if games == {Game.RACE}:
        return Scenario.A
    if games == {Game.FLIGHT}:
        return Scenario.B
    return Scenario.C


def assemble_features(sessions: list[SessionRecord], scheme: LabelScheme) -> Dataset:
    """One labeled feature row per frame, profile context replicated.

    Sessions without a single report carry no usable labels and are
    rejected with their id.
    """
    if not sessions:
        raise DataError("no sessions to assemble")
    rows: list[list[float]] = []
    labels: list[int] = []
    sids: list[str] = []
    stamps: list[float] = []
    provenance: list[str] = []
    for session in sessions:
        if all(f.reported_discomfort is None for f in session.frames):
            raise DataError(f"session {session.session_id!r} has no discomfort reports")
        provenance.append(session.session_id)
        levels = propagate_reports(session.frames)
        for frame, level in zip(session.frames, levels):
            rows.append(
                encode_frame_vector(session.profile, session.pre_questionnaire, session.config, frame)
            )
            labels.append(collapse_label(level, scheme))
            sids.append(session.session_id)
            stamps.append(frame.timestamp)
    return Dataset(
        scheme=scheme,
        scenario=_scenario_of(sessions),
        attribute_names=ATTRIBUTE_NAMES,
        X=np.asarray(rows, dtype=np.float64),
        y=np.asarray(labels, dtype=np.int64),
        session_ids=tuple(sids),
        timestamps=np.asarray(stamps, dtype=np.float64),
        provenance=tuple(provenance),
    )


def filter_scenario(sessions: list[SessionRecord], scenario: Scenario) -> list[SessionRecord]:
    """Keep only sessions whose game belongs to the scenario, order kept."""
    allowed = scenario.games
    return [s for s in sessions if s.game in allowed]


def build_dataset(sessions: list[SessionRecord], scheme: LabelScheme, scenario: Scenario) -> Dataset:
    selected = filter_scenario(sessions, scenario)
    if not selected:
        raise DataError(f"scenario {scenario.value} selects no sessions")
    return assemble_features(selected, scheme)


def class_distribution(dataset: Dataset) -> ClassDistribution:
    if dataset.n_rows == 0:
        raise DataError("class distribution of an empty dataset is undefined")
    k = dataset.scheme.n_classes
    counts = np.bincount(dataset.y, minlength=k)
    total = int(counts.sum())
    return ClassDistribution(
        counts=tuple(int(c) for c in counts),
        proportions=tuple(float(c) / total for c in counts),
    )


# ---------------------------------------------------------------------------
# folds


def stratified_kfold(dataset: Dataset, k: int, seed: int) -> FoldPlan:
    """Seeded stratified fold plan: per-class fold counts differ by <= 1.

    Remainder rows rotate across folds class by class (label order) so fold
    totals stay balanced; the plan is a pure function of row order, k, seed.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    y = dataset.y
    assignments = np.full(dataset.n_rows, -1, dtype=np.int64)
    rng = rng_from(seed, "kfold", k)
    offset = 0
    for label in range(dataset.scheme.n_classes):
        indices = np.nonzero(y == label)[0]
        if indices.size == 0:
            continue
        if indices.size < k:
            raise DataError(f"class {label} has {indices.size} rows, fewer than k={k}")
        shuffled = rng.permutation(indices)
        for j, row in enumerate(shuffled):
            assignments[row] = (offset + j) % k
        offset = (offset + indices.size) % k
    return FoldPlan(k=k, seed=seed, assignments=assignments)
