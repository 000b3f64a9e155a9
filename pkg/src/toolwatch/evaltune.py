"""Evaluation (confusion matrices, Type-2 error, per-class metrics) and tuning
(train/test splits, k-fold cross-validation, grid search, split sweep)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from toolwatch import knn
from toolwatch.dataset import ToolCondition
from toolwatch.features import FeatureTable
from toolwatch.knn import KnnHyperparameters, KnnModel

METRIC_ORDER = {"manhattan": 0, "euclidean": 1, "minkowski": 2, "cosine": 3}
WEIGHTING_ORDER = {"uniform": 0, "inverse_distance": 1}


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts, rows = actual class, columns = predicted class."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=int)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (3, 3):
            raise ValueError("confusion matrix must be 3x3")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def to_csv(self) -> str:
        header = "actual," + ",".join(c.display_name for c in ToolCondition)
        lines = [header]
        for a in ToolCondition:
            lines.append(a.display_name + "," + ",".join(str(int(v)) for v in self.counts[a]))
        return "\n".join(lines) + "\n"


def confusion(actual: Sequence[int], predicted: Sequence[int]) -> ConfusionMatrix:
    actual = np.asarray(actual, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    if actual.shape != predicted.shape or actual.size == 0:
        raise ValueError("actual/predicted must be equal-length non-empty sequences")
    counts = np.zeros((3, 3), dtype=int)
    np.add.at(counts, (actual, predicted), 1)
    return ConfusionMatrix(counts=counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    fp_rate: Optional[float]
    roc_auc: Optional[float] = None


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    type2_error_pct: float
    per_class: tuple[ClassMetrics, ClassMetrics, ClassMetrics]


def metrics(cm: ConfusionMatrix, scores: Optional[np.ndarray] = None,
            actual: Optional[Sequence[int]] = None) -> MetricsReport:
    """Summary metrics from a confusion matrix.

    Type-2 error counts worn tools (actual Initial/Progressed) predicted as
    Good Condition, as a percentage of all samples.  A class with no actual
    (or predicted) samples gets recall (or precision) reported as None rather
    than 0.  One-vs-rest trapezoidal ROC AUC is added when per-row class
    scores and actual labels are supplied.
    """
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    type2 = 100.0 * (counts[ToolCondition.INITIAL_WEAR, ToolCondition.GOOD_CONDITION]
                     + counts[ToolCondition.PROGRESSED_WEAR, ToolCondition.GOOD_CONDITION]) / total
    per_class = []
    for c in range(3):
        tp = counts[c, c]
        row = counts[c].sum()
        col = counts[:, c].sum()
        fp = col - tp
        tn = total - row - fp
        recall = float(tp) / row if row > 0 else None
        precision = float(tp) / col if col > 0 else None
        if precision is not None and recall is not None and precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = None
        fp_rate = float(fp) / (fp + tn) if (fp + tn) > 0 else None
        auc = None
        if scores is not None and actual is not None:
            auc = roc_auc_ovr(np.asarray(actual) == c, np.asarray(scores)[:, c])
        per_class.append(ClassMetrics(precision=precision, recall=recall, f1=f1,
                                      fp_rate=fp_rate, roc_auc=auc))
    return MetricsReport(accuracy=cm.accuracy, type2_error_pct=type2,
                         per_class=tuple(per_class))


def roc_auc_ovr(positive: np.ndarray, score: np.ndarray) -> Optional[float]:
    """One-vs-rest ROC AUC via the trapezoidal rule over score thresholds."""
    positive = np.asarray(positive, dtype=bool)
    n_pos = positive.sum()
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(-np.asarray(score, dtype=float), kind="stable")
    pos_sorted = positive[order]
    score_sorted = np.asarray(score, dtype=float)[order]
    tp = np.cumsum(pos_sorted)
    fp = np.cumsum(~pos_sorted)
    # keep only threshold boundaries (last index of each distinct score)
    distinct = np.append(score_sorted[1:] != score_sorted[:-1], True)
    tpr = np.concatenate([[0.0], tp[distinct] / n_pos])
    fpr = np.concatenate([[0.0], fp[distinct] / n_neg])
    return float(np.trapezoid(tpr, fpr))


def format_confusion(cm: ConfusionMatrix, title: str = "Tool health") -> str:
    """Percentage-annotated text block in the style of the published matrices."""
    counts = cm.counts
    total = cm.total
    names = [c.display_name for c in ToolCondition]
    width = 18
    lines = [title, "actual \\ predicted".ljust(width)
             + "".join(n.ljust(width) for n in names) + "row correct"]
    for a in range(3):
        row = names[a].ljust(width)
        for p in range(3):
            cell = f"{counts[a, p]} {100.0 * counts[a, p] / total:.2f}%"
            row += cell.ljust(width)
        rs = counts[a].sum()
        row += f"{counts[a, a]}/{rs} {100.0 * counts[a, a] / rs:.2f}%" if rs else "-"
        lines.append(row)
    correct = int(np.trace(counts))
    lines.append(f"overall {correct} / {total}  {100.0 * correct / total:.2f}%")
    return "\n".join(lines) + "\n"


def split(table: FeatureTable, test_fraction: float, stratified: bool = True,
          rng_seed: int = 0) -> tuple[FeatureTable, FeatureTable]:
    """Deterministic disjoint train/test split; stratified keeps class ratios."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = len(table)
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise ValueError(f"test_fraction {test_fraction} leaves an empty side for {n} rows")
    rng = np.random.default_rng(rng_seed)
    if stratified and table.labels is not None:
        test_idx = []
        class_indices = [np.nonzero(table.labels == c)[0] for c in range(3)]
        quotas = _largest_remainder([len(ci) / n for ci in class_indices], n_test)
        for ci, q in zip(class_indices, quotas):
            perm = rng.permutation(ci)
            test_idx.extend(perm[:q].tolist())
        test_idx = np.sort(np.array(test_idx, dtype=int))
    else:
        perm = rng.permutation(n)
        test_idx = np.sort(perm[:n_test])
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    return table.subset(np.nonzero(~mask)[0]), table.subset(test_idx)


def _largest_remainder(fractions: Sequence[float], total: int) -> list[int]:
    raw = [f * total for f in fractions]
    counts = [int(r) for r in raw]
    short = total - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: raw[i] - counts[i], reverse=True)
    for i in order[:short]:
        counts[i] += 1
    return counts


def kfold_cv(table: FeatureTable, hp: KnnHyperparameters, n_folds: int,
             rng_seed: int = 0, standardize: bool = True) -> tuple[list[float], float]:
    """Stratified k-fold cross-validation accuracy: per-fold values and the mean."""
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if n_folds > len(table):
        raise ValueError(f"{n_folds} folds exceed {len(table)} rows")
    if table.labels is None:
        raise ValueError("kfold_cv requires a labeled table")
    rng = np.random.default_rng(rng_seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    cursor = 0
    for c in range(3):
        for i in rng.permutation(np.nonzero(table.labels == c)[0]):
            folds[cursor % n_folds].append(int(i))
            cursor += 1
    accuracies = []
    for f in range(n_folds):
        test_idx = np.array(sorted(folds[f]), dtype=int)
        if test_idx.size == 0:
            raise ValueError("empty cross-validation fold")
        mask = np.ones(len(table), dtype=bool)
        mask[test_idx] = False
        train = table.subset(np.nonzero(mask)[0])
        test = table.subset(test_idx)
        model = knn.fit(train, hp, standardize=standardize)
        predicted = knn.predict_labels(model, test.values)
        accuracies.append(float((predicted == test.labels).mean()))
    return accuracies, float(np.mean(accuracies))


@dataclass(frozen=True)
class GridSpec:
    n_neighbors: tuple[int, ...] = tuple(range(1, 11))
    metrics: tuple[str, ...] = ("manhattan", "euclidean", "minkowski", "cosine")
    weightings: tuple[str, ...] = ("uniform", "inverse_distance")
    cv_folds: int = 5

    def __post_init__(self):
        if not (self.n_neighbors and self.metrics and self.weightings):
            raise ValueError("grid candidate lists must be non-empty")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")


@dataclass(frozen=True)
class GridResult:
    hp: KnnHyperparameters
    cv_mean: float
    cv_std: float
    fold_accuracies: tuple[float, ...]


def grid_search(table: FeatureTable, grid: GridSpec,
                rng_seed: int = 0) -> tuple[KnnHyperparameters, list[GridResult]]:
    """Exhaustive grid search by cross-validation mean accuracy.

    Ties prefer fewer neighbors, then manhattan < euclidean < minkowski <
    cosine, then uniform before inverse_distance.
    """
    results = []
    for k, metric, weighting in itertools.product(grid.n_neighbors, grid.metrics,
                                                  grid.weightings):
        hp = KnnHyperparameters(n_neighbors=k, metric=metric, weighting=weighting)
        fold_acc, mean = kfold_cv(table, hp, grid.cv_folds, rng_seed=rng_seed)
        results.append(GridResult(hp=hp, cv_mean=mean,
                                  cv_std=float(np.std(fold_acc)),
                                  fold_accuracies=tuple(fold_acc)))
    best = min(results, key=lambda r: (-r.cv_mean, r.hp.n_neighbors,
                                       METRIC_ORDER[r.hp.metric],
                                       WEIGHTING_ORDER[r.hp.weighting]))
    return best.hp, results


def grid_results_csv(results: Sequence[GridResult]) -> str:
    n_folds = len(results[0].fold_accuracies)
    header = ["n_neighbors", "metric", "weighting", "cv_mean", "cv_std"]
    header += [f"fold_{i}" for i in range(n_folds)]
    lines = [",".join(header)]
    for r in results:
        cells = [str(r.hp.n_neighbors), r.hp.metric, r.hp.weighting,
                 repr(r.cv_mean), repr(r.cv_std)]
        cells += [repr(a) for a in r.fold_accuracies]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SweepPoint:
    test_fraction: float
    train_accuracy: float
    test_accuracy: float


def split_sweep(table: FeatureTable, hp: KnnHyperparameters, fractions: Sequence[float],
                rng_seed: int = 0) -> list[SweepPoint]:
    """Train/test accuracy at each test fraction, plot-ready."""
    out = []
    for frac in fractions:
        train, test = split(table, frac, stratified=True, rng_seed=rng_seed)
        model = knn.fit(train, hp)
        train_acc = float((knn.predict_labels(model, train.values) == train.labels).mean())
        test_acc = float((knn.predict_labels(model, test.values) == test.labels).mean())
        out.append(SweepPoint(test_fraction=float(frac), train_accuracy=train_acc,
                              test_accuracy=test_acc))
    return out


def evaluate(model: KnnModel, table: FeatureTable,
             with_scores: bool = False) -> tuple[ConfusionMatrix, MetricsReport]:
    """Confusion matrix and metrics of a model over a labeled table."""
    if table.labels is None:
        raise ValueError("evaluation requires labels")
    predicted = knn.predict_labels(model, table.values)
    cm = confusion(table.labels, predicted)
    if with_scores:
        scores = knn.class_scores(model, table.values)
        return cm, metrics(cm, scores=scores, actual=table.labels)
    return cm, metrics(cm)
