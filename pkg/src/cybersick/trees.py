"""Tree-family classifiers: stump, impurity-split tree, random forest.

All split search, growth, reduced-error pruning, and voting logic lives
here; scikit-learn supplies only the estimator plumbing (get_params /
set_params, fitted-state checks) so the classifiers compose with the wider
ecosystem. Every tie is broken deterministically: splits prefer the lower
attribute index then the lower threshold, predictions prefer the lower
class index, and all randomness flows from explicit seeds.

Split rule is always ``value <= threshold -> left`` with thresholds at
midpoints between consecutive distinct sorted values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .registry import LabelScheme, N_ATTRIBUTES, registry_checksum
from .seeding import derive_seed

#: Gains at or below this are treated as "no strict impurity decrease".
MIN_GAIN = 1e-12

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Model file is malformed or does not match the current registry."""


@dataclass
class TreeNode:
    """Internal node (attribute, threshold, children) or leaf (counts only)."""

    class_counts: np.ndarray
    attribute: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.attribute is None


def node_count(node: TreeNode) -> int:
    if node.is_leaf:
        return 1
    return 1 + node_count(node.left) + node_count(node.right)


def tree_depth(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


# ---------------------------------------------------------------------------
# impurity criteria


def gini_impurity(class_counts: Sequence[int]) -> float:
    """1 - sum(p_c^2); 0 for a pure node, maximal at the uniform mix."""
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("class counts must sum to a positive total")
    p = counts / total
    return float(1.0 - np.sum(p * p))


def entropy(class_counts: Sequence[int]) -> float:
    """Shannon entropy in bits of the class proportions."""
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("class counts must sum to a positive total")
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def info_gain(
    parent_counts: Sequence[int],
    left_counts: Sequence[int],
    right_counts: Sequence[int],
) -> float:
    """Entropy reduction of splitting parent into the two children."""
    parent = np.asarray(parent_counts, dtype=np.int64)
    left = np.asarray(left_counts, dtype=np.int64)
    right = np.asarray(right_counts, dtype=np.int64)
    if not np.array_equal(left + right, parent):
        raise ValueError("children must partition the parent counts")
    n = parent.sum()
    n_left, n_right = left.sum(), right.sum()
    if n_left == 0 or n_right == 0:
        raise ValueError("both children must be non-empty")
    return float(
        entropy(parent) - (n_left / n) * entropy(left) - (n_right / n) * entropy(right)
    )


def _best_split_indexed(
    X: np.ndarray,
    y_sub: np.ndarray,
    indices: np.ndarray,
    candidate_attributes: Sequence[int],
    criterion: str,
    parent_counts: np.ndarray,
    min_child: int,
) -> tuple[int, float, float] | None:
    # Evaluates all candidate attributes in one vectorized batch: column j
    # of every intermediate array is candidate j. Split positions outside
    # the min_child-feasible band or not at a distinct-value boundary get
    # gain -inf. The argmax scans attribute-major then position-ascending,
    # which realizes the (lower attribute, lower threshold) tie-break.
    n = indices.size
    if n < 2 * min_child:
        return None
    k = parent_counts.shape[0]
    if criterion == "gini":
        p = parent_counts / n
        parent_imp = 1.0 - float(p @ p)
    else:
        parent_imp = entropy(parent_counts)

    candidates = np.asarray(candidate_attributes, dtype=np.int64)
    cols = X[np.ix_(indices, candidates)] if candidates.size < X.shape[1] else X[indices]
    # Ordering among equal values never matters: split boundaries sit only
    # between distinct values, so cumulative counts there are order-free.
    order = np.argsort(cols, axis=0)
    sorted_values = np.take_along_axis(cols, order, axis=0)
    sorted_labels = y_sub[order]

    lo, hi = min_child - 1, n - min_child  # feasible split positions [lo, hi)
    boundary = sorted_values[lo + 1 : hi + 1] != sorted_values[lo:hi]
    if not boundary.any():
        return None
    left_sizes = np.arange(lo + 1, hi + 1, dtype=np.float64)[:, None]
    right_sizes = n - left_sizes
    # Class k-1 counts follow from the rest, so cumulate k-1 classes only.
    cums = [np.cumsum(sorted_labels == c, axis=0)[lo:hi] for c in range(k - 1)]
    cums.append(left_sizes - sum(cums))
    if criterion == "gini":
        sq_left = np.zeros((hi - lo, candidates.size))
        sq_right = np.zeros_like(sq_left)
        for c in range(k):
            cum = cums[c]
            sq_left += cum * cum
            right = parent_counts[c] - cum
            sq_right += right * right
        weighted = (
            left_sizes * (1.0 - sq_left / (left_sizes * left_sizes))
            + right_sizes * (1.0 - sq_right / (right_sizes * right_sizes))
        ) / n
    else:
        ent_left = np.zeros((hi - lo, candidates.size))
        ent_right = np.zeros_like(ent_left)
        log_buf = np.zeros_like(ent_left)
        for c in range(k):
            p_left = cums[c] / left_sizes
            p_right = (parent_counts[c] - cums[c]) / right_sizes
            log_buf.fill(0.0)
            np.log2(p_left, where=p_left > 0, out=log_buf)
            ent_left -= p_left * log_buf
            log_buf.fill(0.0)
            np.log2(p_right, where=p_right > 0, out=log_buf)
            ent_right -= p_right * log_buf
        weighted = (left_sizes * ent_left + right_sizes * ent_right) / n

    gains = np.where(boundary, parent_imp - weighted, -np.inf)
    pick = int(np.argmax(gains.T))  # attribute-major, position-ascending
    attr_pos, split_pos = divmod(pick, gains.shape[0])
    gain = float(gains[split_pos, attr_pos])
    if gain <= MIN_GAIN:
        return None
    row = lo + split_pos
    threshold = float((sorted_values[row, attr_pos] + sorted_values[row + 1, attr_pos]) / 2.0)
    return int(candidates[attr_pos]), threshold, gain


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidate_attributes: Sequence[int],
    criterion: str = "gini",
    n_classes: int | None = None,
    min_child: int = 1,
) -> tuple[int, float, float] | None:
    """Impurity-decrease-maximizing (attribute, threshold, decrease).

    Thresholds are midpoints between consecutive distinct sorted values.
    Returns None when no candidate split strictly decreases impurity.
    Ties go to the lower attribute index, then the lower threshold.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    if n < 2 or len(candidate_attributes) == 0:
        return None
    k = n_classes if n_classes is not None else int(y.max()) + 1
    parent_counts = np.bincount(y, minlength=k).astype(np.float64)
    return _best_split_indexed(
        X, y, np.arange(n), candidate_attributes, criterion, parent_counts, min_child
    )


# ---------------------------------------------------------------------------
# growth, pruning, prediction


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    indices: np.ndarray,
    depth: int,
    k: int,
    criterion: str,
    max_depth: int,
    min_leaf: int,
    mtry: int | None,
    rng: np.random.Generator | None,
) -> TreeNode:
    y_sub = y[indices]
    counts = np.bincount(y_sub, minlength=k)
    node = TreeNode(class_counts=counts)
    if depth >= max_depth or indices.size < 2 * min_leaf or np.count_nonzero(counts) <= 1:
        return node
    n_features = X.shape[1]
    if mtry is not None and mtry < n_features:
        candidates = np.sort(rng.choice(n_features, size=mtry, replace=False))
    else:
        candidates = np.arange(n_features)
    found = _best_split_indexed(
        X, y_sub, indices, candidates, criterion, counts.astype(np.float64), min_leaf
    )
    if found is None:
        return node
    attribute, threshold, _ = found
    mask = X[indices, attribute] <= threshold
    node.attribute = attribute
    node.threshold = threshold
    node.left = _grow(X, y, indices[mask], depth + 1, k, criterion, max_depth, min_leaf, mtry, rng)
    node.right = _grow(X, y, indices[~mask], depth + 1, k, criterion, max_depth, min_leaf, mtry, rng)
    return node


def _majority(counts: np.ndarray) -> int:
    return int(np.argmax(counts))  # first max = lowest class index


def _prune_reduced_error(node: TreeNode, X: np.ndarray, y: np.ndarray, indices: np.ndarray) -> int:
    """Bottom-up subtree replacement; returns holdout errors after pruning.

    A subtree collapses to a leaf whenever the leaf's holdout errors do not
    exceed the (already pruned) subtree's, so holdout accuracy never drops.
    """
    leaf_errors = int(np.sum(y[indices] != _majority(node.class_counts)))
    if node.is_leaf:
        return leaf_errors
    mask = X[indices, node.attribute] <= node.threshold
    subtree_errors = _prune_reduced_error(
        node.left, X, y, indices[mask]
    ) + _prune_reduced_error(node.right, X, y, indices[~mask])
    if leaf_errors <= subtree_errors:
        node.attribute = None
        node.threshold = None
        node.left = None
        node.right = None
        return leaf_errors
    return subtree_errors


def _leaf_distributions(node: TreeNode, X: np.ndarray, indices: np.ndarray, out: np.ndarray) -> None:
    if node.is_leaf:
        total = node.class_counts.sum()
        out[indices] = node.class_counts / total
        return
    mask = X[indices, node.attribute] <= node.threshold
    _leaf_distributions(node.left, X, indices[mask], out)
    _leaf_distributions(node.right, X, indices[~mask], out)


def _tree_proba(node: TreeNode, X: np.ndarray, k: int) -> np.ndarray:
    out = np.empty((X.shape[0], k), dtype=np.float64)
    _leaf_distributions(node, X, np.arange(X.shape[0]), out)
    return out


def _stratified_holdout(
    y: np.ndarray, fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(derive_seed(seed, "prune-holdout"))
    holdout_mask = np.zeros(len(y), dtype=bool)
    for label in np.unique(y):
        rows = np.nonzero(y == label)[0]
        take = int(np.floor(fraction * rows.size))
        if take > 0 and take < rows.size:
            holdout_mask[rng.permutation(rows)[:take]] = True
    grow_idx = np.nonzero(~holdout_mask)[0]
    hold_idx = np.nonzero(holdout_mask)[0]
    if hold_idx.size == 0 or grow_idx.size == 0:
        return np.arange(len(y)), np.empty(0, dtype=np.int64)
    return grow_idx, hold_idx


# ---------------------------------------------------------------------------
# estimators


def _validate_matrix(X: object) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError("X must be a 2D matrix of feature rows")
    if not np.isfinite(arr).all():
        raise ValueError("X must not contain NaN or infinite values")
    return arr


def _validate_labels(y: object, n_rows: int) -> np.ndarray:
    arr = np.asarray(y, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] != n_rows:
        raise ValueError("y must be a 1D label array matching X rows")
    if arr.min(initial=0) < 0:
        raise ValueError("labels must be non-negative class indices")
    return arr


class _TreeEstimatorBase(BaseEstimator, ClassifierMixin):
    """Shared fit bookkeeping and prediction for the tree family."""

    def _start_fit(self, X: object, y: object) -> tuple[np.ndarray, np.ndarray]:
        X = _validate_matrix(X)
        y = _validate_labels(y, X.shape[0])
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty dataset")
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = self.n_classes if self.n_classes is not None else int(y.max()) + 1
        if y.max(initial=0) >= self.n_classes_:
            raise ValueError("labels exceed the declared class count")
        self.registry_checksum_ = (
            registry_checksum() if X.shape[1] == N_ATTRIBUTES else None
        )
        self.classes_ = np.arange(self.n_classes_)
        self.scheme_ = scheme_for_classes(self.n_classes_)
        return X, y

    def _check_predict_input(self, X: object) -> np.ndarray:
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        X = _validate_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} attribute values per row, got {X.shape[1]}"
            )
        return X

    def predict(self, X: object) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def predict_proba(self, X: object) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError


def scheme_for_classes(n_classes: int) -> str:
    if n_classes == LabelScheme.BINARY.n_classes:
        return LabelScheme.BINARY.value
    if n_classes == LabelScheme.QUARTERLY.n_classes:
        return LabelScheme.QUARTERLY.value
    return f"classes-{n_classes}"


class TreeClassifier(_TreeEstimatorBase):
    """Greedy binary-split decision tree, optionally reduced-error pruned.

    With ``prune_fraction`` > 0, growth uses a seeded stratified
    (1 - fraction) share and pruning replaces any subtree whose collapse
    to a leaf does not reduce accuracy on the held-out share.
    """

    def __init__(
        self,
        criterion: str = "gini",
        max_depth: int = 12,
        min_leaf: int = 5,
        prune_fraction: float = 0.0,
        seed: int = 0,
        n_classes: int | None = None,
    ):
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.prune_fraction = prune_fraction
        self.seed = seed
        self.n_classes = n_classes

    def _check_hyperparameters(self) -> None:
        if self.criterion not in ("gini", "info_gain"):
            raise ValueError("criterion must be 'gini' or 'info_gain'")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 0.0 <= self.prune_fraction <= 0.5:
            raise ValueError("prune_fraction must be in [0, 0.5]")

    def fit(self, X: object, y: object) -> "TreeClassifier":
        self._check_hyperparameters()
        X, y = self._start_fit(X, y)
        crit = "gini" if self.criterion == "gini" else "entropy"
        if len(np.unique(y)) < 2:
            warnings.warn("training data contains a single class; model is a single leaf")
            self.degenerate_ = True
        else:
            self.degenerate_ = False
        if self.prune_fraction > 0.0:
            grow_idx, hold_idx = _stratified_holdout(y, self.prune_fraction, self.seed)
        else:
            grow_idx, hold_idx = np.arange(len(y)), np.empty(0, dtype=np.int64)
        self.root_ = _grow(
            X, y, grow_idx, 0, self.n_classes_, crit, self.max_depth, self.min_leaf, None, None
        )
        if hold_idx.size > 0:
            _prune_reduced_error(self.root_, X, y, hold_idx)
        return self

    def predict_proba(self, X: object) -> np.ndarray:
        X = self._check_predict_input(X)
        return _tree_proba(self.root_, X, self.n_classes_)


class DecisionStump(TreeClassifier):
    """Depth-1 tree: the single best split over all attributes."""

    def __init__(self, criterion: str = "gini", min_leaf: int = 1, seed: int = 0, n_classes: int | None = None):
        super().__init__(
            criterion=criterion,
            max_depth=1,
            min_leaf=min_leaf,
            prune_fraction=0.0,
            seed=seed,
            n_classes=n_classes,
        )

    # BaseEstimator introspects __init__, so re-declare the parameter set.
    def get_params(self, deep: bool = True) -> dict:
        return {
            "criterion": self.criterion,
            "min_leaf": self.min_leaf,
            "seed": self.seed,
            "n_classes": self.n_classes,
        }


class ForestClassifier(_TreeEstimatorBase):
    """Bagged forest of deep trees with per-node attribute subsampling.

    Tree t draws its bootstrap sample and per-node candidate sets from a
    generator seeded by (seed, t), so models are reproducible regardless
    of scheduling. Prediction averages the per-tree leaf distributions.
    """

    def __init__(
        self,
        n_trees: int = 24,
        mtry: int = 6,
        bootstrap: bool = True,
        criterion: str = "gini",
        max_depth: int = 16,
        min_leaf: int = 2,
        seed: int = 0,
        n_classes: int | None = None,
    ):
        self.n_trees = n_trees
        self.mtry = mtry
        self.bootstrap = bootstrap
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.n_classes = n_classes

    def fit(self, X: object, y: object) -> "ForestClassifier":
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        X, y = self._start_fit(X, y)
        if not 1 <= self.mtry <= X.shape[1]:
            raise ValueError(f"mtry must be in [1, {X.shape[1]}]")
        crit = "gini" if self.criterion == "gini" else "entropy"
        mtry = self.mtry if self.mtry < X.shape[1] else None
        self.degenerate_ = len(np.unique(y)) < 2
        if self.degenerate_:
            warnings.warn("training data contains a single class; model is a single leaf")
        n = X.shape[0]
        self.trees_ = []
        for t in range(self.n_trees):
            rng = np.random.default_rng(derive_seed(self.seed, "tree", t))
            indices = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            self.trees_.append(
                _grow(X, y, indices, 0, self.n_classes_, crit, self.max_depth, self.min_leaf, mtry, rng)
            )
        return self

    def predict_proba(self, X: object) -> np.ndarray:
        X = self._check_predict_input(X)
        acc = np.zeros((X.shape[0], self.n_classes_), dtype=np.float64)
        for root in self.trees_:
            acc += _tree_proba(root, X, self.n_classes_)
        return acc / len(self.trees_)


def predict_distribution(model: _TreeEstimatorBase, values: Sequence[float]) -> np.ndarray:
    """Per-class probabilities for one feature vector (length-checked)."""
    row = np.asarray(values, dtype=np.float64)
    if row.ndim != 1:
        raise ValueError("expected a single feature vector")
    return model.predict_proba(row.reshape(1, -1))[0]


def predict_label(model: _TreeEstimatorBase, values: Sequence[float]) -> int:
    return int(np.argmax(predict_distribution(model, values)))


# ---------------------------------------------------------------------------
# learner registry

LEARNER_NAMES: tuple[str, ...] = ("stump", "tree", "pruned", "forest")


def make_learner(name: str, seed: int = 0, n_classes: int | None = None, **overrides) -> _TreeEstimatorBase:
    """Instantiate a named learner with its default configuration.

    ``tree`` is the unpruned gini tree; ``pruned`` grows with information
    gain and applies reduced-error pruning on a 20% holdout.
    """
    if name == "stump":
        return DecisionStump(seed=seed, n_classes=n_classes, **overrides)
    if name == "tree":
        return TreeClassifier(criterion="gini", seed=seed, n_classes=n_classes, **overrides)
    if name == "pruned":
        params = {"criterion": "info_gain", "prune_fraction": 0.2}
        params.update(overrides)
        return TreeClassifier(seed=seed, n_classes=n_classes, **params)
    if name == "forest":
        return ForestClassifier(seed=seed, n_classes=n_classes, **overrides)
    raise ValueError(f"unknown learner {name!r}; choose from {LEARNER_NAMES}")


# ---------------------------------------------------------------------------
# persistence


def _write_nodes(node: TreeNode, lines: list[str]) -> None:
    if node.is_leaf:
        lines.append("L " + " ".join(str(int(c)) for c in node.class_counts))
        return
    lines.append(f"I {node.attribute} {node.threshold!r}")
    _write_nodes(node.left, lines)
    _write_nodes(node.right, lines)


def dumps_model(model: _TreeEstimatorBase, ranking: "object | None" = None) -> bytes:
    """Serialize a fitted model to the versioned flat text format.

    ``ranking`` (an AttributeRanking) may be attached for downstream cause
    inference during serving; omitted when None.
    """
    if not hasattr(model, "n_features_in_"):
        raise NotFittedError("cannot persist an unfitted model")
    lines = [f"csmodel {FORMAT_VERSION}"]
    if isinstance(model, DecisionStump):
        kind = "stump"
    elif isinstance(model, TreeClassifier):
        kind = "tree"
    elif isinstance(model, ForestClassifier):
        kind = "forest"
    else:
        raise ModelFormatError(f"cannot persist a {type(model).__name__}")
    lines.append(f"kind {kind}")
    lines.append(f"scheme {model.scheme_}")
    lines.append(f"n_classes {model.n_classes_}")
    lines.append(f"n_features {model.n_features_in_}")
    lines.append(f"registry_checksum {model.registry_checksum_ or '-'}")
    lines.append(f"criterion {model.criterion}")
    lines.append(f"max_depth {model.max_depth}")
    lines.append(f"min_leaf {model.min_leaf}")
    lines.append(f"seed {model.seed}")
    if kind == "forest":
        lines.append(f"n_trees {model.n_trees}")
        lines.append(f"mtry {model.mtry}")
        lines.append(f"bootstrap {int(model.bootstrap)}")
    else:
        lines.append(f"prune_fraction {model.prune_fraction!r}")
    if ranking is not None:
        cells = ";".join(
            f"{e.name}={e.accuracy_without!r}:{e.impact!r}" for e in ranking.entries
        )
        lines.append(f"ranking {ranking.baseline_accuracy!r} {cells}")
    roots = model.trees_ if kind == "forest" else [model.root_]
    for root in roots:
        lines.append("tree")
        _write_nodes(root, lines)
        lines.append("endtree")
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _read_nodes(lines: list[str], pos: int, k: int) -> tuple[TreeNode, int]:
    record = lines[pos]
    if record.startswith("L "):
        counts = np.array([int(c) for c in record[2:].split()], dtype=np.int64)
        if counts.shape[0] != k:
            raise ModelFormatError(f"leaf at line {pos + 1} has {counts.shape[0]} counts, expected {k}")
        return TreeNode(class_counts=counts), pos + 1
    if record.startswith("I "):
        _, attr, thr = record.split(" ")
        left, pos = _read_nodes(lines, pos + 1, k)
        right, pos = _read_nodes(lines, pos, k)
        node = TreeNode(
            class_counts=left.class_counts + right.class_counts,
            attribute=int(attr),
            threshold=float(thr),
            left=left,
            right=right,
        )
        return node, pos
    raise ModelFormatError(f"unexpected node record at line {pos + 1}: {record!r}")


def loads_model(data: bytes) -> tuple[_TreeEstimatorBase, "object | None"]:
    """Load a persisted model; returns (estimator, attached ranking or None)."""
    from .evaluation import AttributeRanking, RankEntry  # local import avoids a cycle

    lines = data.decode("utf-8").splitlines()
    if not lines or not lines[0].startswith("csmodel "):
        raise ModelFormatError("not a model file (missing 'csmodel' header)")
    version = int(lines[0].split(" ", 1)[1])
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    header: dict[str, str] = {}
    pos = 1
    while pos < len(lines) and lines[pos] != "tree":
        key, _, value = lines[pos].partition(" ")
        header[key] = value
        pos += 1
    try:
        kind = header["kind"]
        n_classes = int(header["n_classes"])
        n_features = int(header["n_features"])
        checksum = header["registry_checksum"]
        seed = int(header["seed"])
    except KeyError as exc:
        raise ModelFormatError(f"missing header field {exc}") from exc
    if checksum != "-" and checksum != registry_checksum():
        raise ModelFormatError(
            "registry checksum mismatch: the model was built against a different attribute registry"
        )

    roots: list[TreeNode] = []
    while pos < len(lines) and lines[pos] == "tree":
        root, pos = _read_nodes(lines, pos + 1, n_classes)
        if pos >= len(lines) or lines[pos] != "endtree":
            raise ModelFormatError(f"missing 'endtree' near line {pos + 1}")
        pos += 1
        roots.append(root)
    if pos >= len(lines) or lines[pos] != "end":
        raise ModelFormatError("missing 'end' trailer")
    if not roots:
        raise ModelFormatError("model file contains no trees")

    if kind == "forest":
        model: _TreeEstimatorBase = ForestClassifier(
            n_trees=int(header["n_trees"]),
            mtry=int(header["mtry"]),
            bootstrap=bool(int(header["bootstrap"])),
            criterion=header["criterion"],
            max_depth=int(header["max_depth"]),
            min_leaf=int(header["min_leaf"]),
            seed=seed,
            n_classes=n_classes,
        )
        model.trees_ = roots
    else:
        if kind == "stump":
            model = DecisionStump(
                criterion=header["criterion"],
                min_leaf=int(header["min_leaf"]),
                seed=seed,
                n_classes=n_classes,
            )
        else:
            model = TreeClassifier(
                criterion=header["criterion"],
                max_depth=int(header["max_depth"]),
                min_leaf=int(header["min_leaf"]),
                prune_fraction=float(header["prune_fraction"]),
                seed=seed,
                n_classes=n_classes,
            )
        if len(roots) != 1:
            raise ModelFormatError(f"{kind} model must contain exactly one tree")
        model.root_ = roots[0]
    model.n_features_in_ = n_features
    model.n_classes_ = n_classes
    model.classes_ = np.arange(n_classes)
    model.scheme_ = header["scheme"]
    model.registry_checksum_ = None if checksum == "-" else checksum
    model.degenerate_ = False

    ranking = None
    if "ranking" in header:
        baseline_text, _, cells = header["ranking"].partition(" ")
        entries = []
        for cell in cells.split(";"):
            if not cell:
                continue
            name, _, payload = cell.partition("=")
            acc_text, _, impact_text = payload.partition(":")
            entries.append(RankEntry(name=name, accuracy_without=float(acc_text), impact=float(impact_text)))
        ranking = AttributeRanking(baseline_accuracy=float(baseline_text), entries=tuple(entries))
    return model, ranking


def save_model(model: _TreeEstimatorBase, path: str, ranking: "object | None" = None) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_model(model, ranking))


def load_model(path: str) -> tuple[_TreeEstimatorBase, "object | None"]:
    with open(path, "rb") as fh:
        return loads_model(fh.read())
