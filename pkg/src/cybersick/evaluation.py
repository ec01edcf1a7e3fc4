"""Metrics, cross-validated evaluation, the experiment grid, and ranking.

Accuracy and Cohen's kappa are computed from explicit confusion matrices
(rows = actual, columns = predicted). Cross-validation trains on k-1
stratified folds and scores the held-out fold; the scenario x scheme x
learner grid derives one sub-seed per cell so each cell reproduces exactly
as a standalone cross_validate call. Attribute ranking retrains with one
attribute removed at a time and measures the drop in full-training-set
accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FoldPlan, build_dataset, stratified_kfold
from .records import SessionRecord
from .registry import LabelScheme, Scenario
from .seeding import derive_seed
from .trees import make_learner

ALL_SCENARIOS = (Scenario.A, Scenario.B, Scenario.C)
ALL_SCHEMES = (LabelScheme.BINARY, LabelScheme.QUARTERLY)


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    """k x k count matrix: cm[actual, predicted]."""
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred must have equal length")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true, dtype=np.int64), np.asarray(y_pred, dtype=np.int64)), 1)
    return cm


def accuracy(cm: np.ndarray) -> float:
    """Trace over total count."""
    cm = np.asarray(cm)
    total = cm.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    return float(np.trace(cm) / total)


def cohen_kappa(cm: np.ndarray) -> float:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e).

    A degenerate matrix with expected agreement 1 (all mass in one
    row-column pair) scores 0: such predictions carry no information.
    """
    cm = np.asarray(cm, dtype=np.float64)
    total = cm.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    p_observed = np.trace(cm) / total
    p_expected = float(np.dot(cm.sum(axis=1), cm.sum(axis=0)) / (total * total))
    if p_expected >= 1.0:
        return 0.0
    return float((p_observed - p_expected) / (1.0 - p_expected))


@dataclass(frozen=True)
class FoldResult:
    fold: int
    accuracy: float
    kappa: float
    cm: np.ndarray


@dataclass(frozen=True)
class EvalReport:
    learner: str
    scenario: Scenario
    scheme: LabelScheme
    accuracy: float
    kappa: float
    per_fold: tuple[FoldResult, ...]
    aggregate_cm: np.ndarray

    def to_dict(self) -> dict:
        return {
            "learner": self.learner,
            "scenario": self.scenario.value,
            "scheme": self.scheme.value,
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "aggregate_confusion": self.aggregate_cm.tolist(),
            "per_fold": [
                {
                    "fold": fr.fold,
                    "accuracy": fr.accuracy,
                    "kappa": fr.kappa,
                    "confusion": fr.cm.tolist(),
                }
                for fr in self.per_fold
            ],
        }

    @staticmethod
    def from_dict(obj: dict) -> "EvalReport":
        return EvalReport(
            learner=obj["learner"],
            scenario=Scenario(obj["scenario"]),
            scheme=LabelScheme(obj["scheme"]),
            accuracy=float(obj["accuracy"]),
            kappa=float(obj["kappa"]),
            aggregate_cm=np.asarray(obj["aggregate_confusion"], dtype=np.int64),
            per_fold=tuple(
                FoldResult(
                    fold=int(f["fold"]),
                    accuracy=float(f["accuracy"]),
                    kappa=float(f["kappa"]),
                    cm=np.asarray(f["confusion"], dtype=np.int64),
                )
                for f in obj["per_fold"]
            ),
        )


@dataclass(frozen=True)
class ExperimentGrid:
    k: int
    seed: int
    reports: tuple[EvalReport, ...]

    def cell(self, scenario: Scenario, scheme: LabelScheme, learner: str) -> EvalReport:
        for report in self.reports:
            if report.scenario is scenario and report.scheme is scheme and report.learner == learner:
                return report
        raise KeyError(f"no report for ({scenario.value}, {scheme.value}, {learner})")

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "reports": [r.to_dict() for r in self.reports]}

    def to_json(self) -> bytes:
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=False).encode("utf-8")

    @staticmethod
    def from_dict(obj: dict) -> "ExperimentGrid":
        return ExperimentGrid(
            k=int(obj["k"]),
            seed=int(obj["seed"]),
            reports=tuple(EvalReport.from_dict(r) for r in obj["reports"]),
        )


@dataclass(frozen=True)
class RankEntry:
    name: str
    accuracy_without: float
    impact: float


@dataclass(frozen=True)
class AttributeRanking:
    baseline_accuracy: float
    entries: tuple[RankEntry, ...]

    def position(self, name: str) -> int:
        for i, entry in enumerate(self.entries):
            if entry.name == name:
                return i
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "baseline_accuracy": self.baseline_accuracy,
            "entries": [
                {"name": e.name, "accuracy_without": e.accuracy_without, "impact": e.impact}
                for e in self.entries
            ],
        }


# ---------------------------------------------------------------------------
# cross-validation


def _run_fold(
    learner: str,
    X: np.ndarray,
    y: np.ndarray,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    fold_seed: int,
    n_classes: int,
    overrides: dict | None,
) -> np.ndarray:
    if np.intersect1d(train_idx, test_idx).size:
        raise AssertionError("fold leakage: train and test share rows")
    model = make_learner(learner, seed=fold_seed, n_classes=n_classes, **(overrides or {}))
    model.fit(X[train_idx], y[train_idx])
    return confusion_matrix(y[test_idx], model.predict(X[test_idx]), n_classes)


def cross_validate(
    learner: str,
    dataset: Dataset,
    k: int = 10,
    seed: int = 0,
    overrides: dict | None = None,
    fold_plan: FoldPlan | None = None,
    n_jobs: int | None = None,
) -> EvalReport:
    """k-fold evaluation of a named learner over ``dataset``.

    Deterministic for fixed (dataset row order, learner, k, seed) whatever
    ``n_jobs`` is: every fold trains from its own derived seed and results
    assemble in fold order. The report's aggregate metrics come from the
    summed fold matrices.
    """
    plan = fold_plan if fold_plan is not None else stratified_kfold(dataset, k, seed)
    n_classes = dataset.scheme.n_classes
    fold_args = [
        (
            learner,
            dataset.X,
            dataset.y,
            plan.train_indices(fold),
            plan.test_indices(fold),
            derive_seed(seed, "fold", fold),
            n_classes,
            overrides,
        )
        for fold in range(plan.k)
    ]
    if n_jobs is not None and n_jobs > 1:
        import multiprocessing
        from concurrent.futures import ProcessPoolExecutor

        context = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=n_jobs, mp_context=context) as pool:
            matrices = list(pool.map(_run_fold_star, fold_args))
    else:
        matrices = [_run_fold(*args) for args in fold_args]

    per_fold = tuple(
        FoldResult(fold=fold, accuracy=accuracy(cm), kappa=cohen_kappa(cm), cm=cm)
        for fold, cm in enumerate(matrices)
    )
    aggregate = np.sum(matrices, axis=0)
    return EvalReport(
        learner=learner,
        scenario=dataset.scenario,
        scheme=dataset.scheme,
        accuracy=accuracy(aggregate),
        kappa=cohen_kappa(aggregate),
        per_fold=per_fold,
        aggregate_cm=aggregate,
    )


def _run_fold_star(args: tuple) -> np.ndarray:
    return _run_fold(*args)


def cell_seed(seed: int, scenario: Scenario, scheme: LabelScheme, learner: str) -> int:
    """Per-cell sub-seed; documented in docs/report-schema.md."""
    return derive_seed(seed, scenario.value, scheme.value, learner)


def run_experiment_grid(
    sessions: list[SessionRecord],
    learners: tuple[str, ...],
    k: int = 10,
    seed: int = 0,
    scenarios: tuple[Scenario, ...] = ALL_SCENARIOS,
    schemes: tuple[LabelScheme, ...] = ALL_SCHEMES,
    overrides: dict | None = None,
    n_jobs: int | None = None,
) -> ExperimentGrid:
    """Every scenario x scheme x learner cell as an EvalReport."""
    reports: list[EvalReport] = []
    for scenario in scenarios:
        for scheme in schemes:
            dataset = build_dataset(sessions, scheme, scenario)
            for learner in learners:
                reports.append(
                    cross_validate(
                        learner,
                        dataset,
                        k=k,
                        seed=cell_seed(seed, scenario, scheme, learner),
                        overrides=overrides,
                        n_jobs=n_jobs,
                    )
                )
    return ExperimentGrid(k=k, seed=seed, reports=tuple(reports))


# ---------------------------------------------------------------------------
# attribute ranking


def _full_set_accuracy(learner: str, X: np.ndarray, y: np.ndarray, n_classes: int, seed: int, overrides: dict | None) -> float:
    model = make_learner(learner, seed=seed, n_classes=n_classes, **(overrides or {}))
    model.fit(X, y)
    cm = confusion_matrix(y, model.predict(X), n_classes)
    return accuracy(cm)


def rank_attributes(
    learner: str,
    dataset: Dataset,
    seed: int = 0,
    overrides: dict | None = None,
) -> AttributeRanking:
    """Leave-one-attribute-out importance under full-set training.

    Baseline trains and evaluates on the whole dataset; each attribute's
    impact is the accuracy drop after retraining without it. This inherits
    the optimistic bias of training-set evaluation by design: it measures
    how much the learner leaned on the attribute, not generalization.
    Entries sort by impact descending, ties by original attribute order.
    """
    n_classes = dataset.scheme.n_classes
    baseline = _full_set_accuracy(learner, dataset.X, dataset.y, n_classes, seed, overrides)
    entries: list[RankEntry] = []
    for index, name in enumerate(dataset.attribute_names):
        reduced = np.delete(dataset.X, index, axis=1)
        acc = _full_set_accuracy(learner, reduced, dataset.y, n_classes, seed, overrides)
        entries.append(RankEntry(name=name, accuracy_without=acc, impact=baseline - acc))
    order = sorted(range(len(entries)), key=lambda i: (-entries[i].impact, i))
    return AttributeRanking(baseline_accuracy=baseline, entries=tuple(entries[i] for i in order))
