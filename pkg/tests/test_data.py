from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_frame, make_session

from cybersick.data import (
    DataError,
    assemble_features,
    build_dataset,
    class_distribution,
    dataset_to_csv,
    filter_scenario,
    parse_sessions,
    propagate_reports,
    sessions_to_jsonl,
    stratified_kfold,
)
from cybersick.registry import Game, LabelScheme, Scenario, collapse_label

FIXTURE_JSONL = "docs/fixtures/session.jsonl"
FIXTURE_CSV = "docs/fixtures/features.csv"


# ---------------------------------------------------------------------------
# parsing


def test_parse_golden_jsonl_fixture():
    with open(FIXTURE_JSONL, "rb") as fh:
        sessions = parse_sessions(fh.read())
    assert len(sessions) == 1
    assert len(sessions[0].frames) == 3
    assert sessions[0].game is Game.RACE


def test_parse_empty_stream():
    assert parse_sessions(b"") == []


def test_parse_rejects_negative_frame_rate():
    with open(FIXTURE_JSONL, "rb") as fh:
        text = fh.read().decode()
    broken = text.replace('"frame_rate":72.0', '"frame_rate":-5.0')
    with pytest.raises(DataError, match="frame_rate"):
        parse_sessions(broken)


def test_parse_reports_line_number_on_bad_json():
    with pytest.raises(DataError, match="line 1"):
        parse_sessions(b"{not json}\n")


def test_parse_rejects_unknown_fields():
    with open(FIXTURE_JSONL, "rb") as fh:
        text = fh.read().decode()
    broken = text.replace('"game":"race"', '"game":"race","bogus":1')
    with pytest.raises(DataError, match="bogus"):
        parse_sessions(broken)


def test_jsonl_round_trip(small_corpus):
    sessions, _ = small_corpus
    blob = sessions_to_jsonl(sessions)
    assert parse_sessions(blob) == sessions


def test_csv_round_trip_against_golden():
    with open(FIXTURE_JSONL, "rb") as fh:
        sessions = parse_sessions(fh.read())
    dataset = assemble_features(sessions, LabelScheme.QUARTERLY)
    with open(FIXTURE_CSV, "rb") as fh:
        assert dataset_to_csv(dataset) == fh.read()
    back = parse_sessions(dataset_to_csv(dataset), fmt="csv")
    assert len(back) == 1
    assert [f.reported_discomfort for f in back[0].frames] == [1, 1, 2]
    assert back[0].profile == sessions[0].profile
    assert back[0].config == sessions[0].config
    assert back[0].pre_questionnaire == sessions[0].pre_questionnaire


def test_csv_rejects_unknown_columns():
    with open(FIXTURE_CSV, "rb") as fh:
        text = fh.read().decode()
    broken = text.replace("gender,", "gender,bogus_attr,")
    with pytest.raises(DataError, match="bogus_attr"):
        parse_sessions(broken, fmt="csv")


# ---------------------------------------------------------------------------
# assembly


def test_carry_forward_labels_by_hand():
    # hand-derived oracle: report severe at t=2 only -> [0, 1, 1] binary
    frames = [make_frame(1.0), make_frame(2.0, reported=3), make_frame(3.0)]
    session = make_session(frames)
    dataset = assemble_features([session], LabelScheme.BINARY)
    assert dataset.y.tolist() == [0, 1, 1]
    quarterly = assemble_features([session], LabelScheme.QUARTERLY)
    assert quarterly.y.tolist() == [0, 3, 3]


def test_all_none_reports_label_zero_under_both_schemes():
    frames = [make_frame(t, reported=0) for t in (0.0, 1.0, 2.0)]
    session = make_session(frames)
    for scheme in LabelScheme:
        assert assemble_features([session], scheme).y.tolist() == [0, 0, 0]


def test_row_count_and_provenance():
    sessions = [
        make_session([make_frame(t, reported=0) for t in range(5)], session_id="a"),
        make_session([make_frame(t, reported=1) for t in range(5)], session_id="b"),
    ]
    dataset = assemble_features(sessions, LabelScheme.BINARY)
    assert dataset.n_rows == 10
    assert dataset.provenance == ("a", "b")
    assert set(dataset.session_ids) == {"a", "b"}


def test_session_without_reports_rejected():
    session = make_session([make_frame(0.0), make_frame(1.0)], session_id="silent")
    with pytest.raises(DataError, match="silent"):
        assemble_features([session], LabelScheme.BINARY)


def test_propagation_idempotent(small_corpus):
    sessions, _ = small_corpus
    for session in sessions:
        levels = propagate_reports(session.frames)
        relabeled = tuple(
            frame.__class__(**{**frame.__dict__, "reported_discomfort": level})
            for frame, level in zip(session.frames, levels)
        )
        assert propagate_reports(relabeled) == levels


def test_binary_equals_collapsed_quarterly(small_corpus):
    sessions, _ = small_corpus
    binary = assemble_features(sessions, LabelScheme.BINARY)
    quarterly = assemble_features(sessions, LabelScheme.QUARTERLY)
    collapsed = [collapse_label(v, LabelScheme.BINARY) for v in quarterly.y]
    assert binary.y.tolist() == collapsed


# ---------------------------------------------------------------------------
# scenarios and distributions


def test_filter_scenario():
    race = make_session([make_frame(0.0, reported=0)], game=Game.RACE, session_id="r1")
    flight = make_session([make_frame(0.0, reported=0)], game=Game.FLIGHT, session_id="f1")
    race2 = make_session([make_frame(0.0, reported=0)], game=Game.RACE, session_id="r2")
    sessions = [race, flight, race2]
    assert [s.session_id for s in filter_scenario(sessions, Scenario.A)] == ["r1", "r2"]
    assert filter_scenario(sessions, Scenario.C) == sessions
    assert filter_scenario([], Scenario.B) == []


def test_scenario_recorded_on_dataset(small_corpus):
    sessions, _ = small_corpus
    assert build_dataset(sessions, LabelScheme.BINARY, Scenario.A).scenario is Scenario.A
    assert build_dataset(sessions, LabelScheme.BINARY, Scenario.C).scenario is Scenario.C


def test_class_distribution_examples():
    frames = [make_frame(float(t), reported=r) for t, r in enumerate((0, 0, 1, 1))]
    dataset = assemble_features([make_session(frames)], LabelScheme.BINARY)
    dist = class_distribution(dataset)
    assert dist.counts == (2, 2)
    assert dist.proportions == (0.5, 0.5)
    assert abs(sum(dist.proportions) - 1.0) < 1e-12

    frames = [make_frame(float(t), reported=t) for t in range(4)]
    quarterly = assemble_features([make_session(frames)], LabelScheme.QUARTERLY)
    assert class_distribution(quarterly).counts == (1, 1, 1, 1)


# ---------------------------------------------------------------------------
# folds


def _dataset_with_labels(labels):
    frames = [make_frame(float(t), reported=r) for t, r in enumerate(labels)]
    scheme = LabelScheme.QUARTERLY if max(labels) > 1 else LabelScheme.BINARY
    return assemble_features([make_session(frames)], scheme)


def test_stratified_kfold_balanced_binary():
    # 100 rows, 50/50: every fold must hold exactly 5 of each class
    labels = [0, 1] * 50
    dataset = _dataset_with_labels(labels)
    plan = stratified_kfold(dataset, k=10, seed=3)
    for fold in range(10):
        test_labels = dataset.y[plan.test_indices(fold)]
        assert (test_labels == 0).sum() == 5
        assert (test_labels == 1).sum() == 5


def test_stratified_kfold_partition_and_determinism():
    labels = ([0] * 23) + ([1] * 31) + ([2] * 17) + ([3] * 29)
    dataset = _dataset_with_labels(labels)
    plan = stratified_kfold(dataset, k=5, seed=11)
    seen = np.concatenate([plan.test_indices(f) for f in range(5)])
    assert sorted(seen.tolist()) == list(range(dataset.n_rows))
    again = stratified_kfold(dataset, k=5, seed=11)
    assert np.array_equal(plan.assignments, again.assignments)
    assert not np.array_equal(
        plan.assignments, stratified_kfold(dataset, k=5, seed=12).assignments
    )


def test_stratified_kfold_class_smaller_than_k_errors():
    labels = [0] * 50 + [1] * 3
    dataset = _dataset_with_labels(labels)
    with pytest.raises(DataError, match="class 1"):
        stratified_kfold(dataset, k=10, seed=0)


@settings(max_examples=30, deadline=None)
@given(
    counts=st.lists(st.integers(5, 40), min_size=2, max_size=4),
    k=st.integers(2, 5),
    seed=st.integers(0, 2**32),
)
def test_stratified_kfold_invariants(counts, k, seed):
    labels = [c for c, n in enumerate(counts) for _ in range(n)]
    dataset = _dataset_with_labels(labels)
    plan = stratified_kfold(dataset, k=k, seed=seed)
    assert (plan.assignments >= 0).all() and (plan.assignments < k).all()
    for label in range(len(counts)):
        per_fold = [
            int((dataset.y[plan.test_indices(f)] == label).sum()) for f in range(k)
        ]
        assert max(per_fold) - min(per_fold) <= 1
    for fold in range(k):
        assert np.intersect1d(plan.test_indices(fold), plan.train_indices(fold)).size == 0
