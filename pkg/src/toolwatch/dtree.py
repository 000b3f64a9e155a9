"""CART-style decision tree on Gini impurity, used for feature ranking and selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from toolwatch.dataset import ToolCondition
from toolwatch.features import FeatureTable

N_CLASSES = 3
_MIN_GAIN = 1e-12


@dataclass
class TreeNode:
    gini: float
    sample_count: int
    class_histogram: np.ndarray  # 3 counts
    predicted_label: ToolCondition
    split_feature: Optional[int] = None
    split_threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.split_feature is None


def gini_impurity(histogram: np.ndarray) -> float:
    n = histogram.sum()
    if n == 0:
        return 0.0
    p = histogram / n
    return float(1.0 - np.sum(p * p))


def best_split(values: np.ndarray, labels: np.ndarray) -> Optional[tuple[int, float, float]]:
    """Exhaustive best (feature, threshold, impurity decrease) over midpoint thresholds.

    Ties resolve to the lowest feature index, then the lowest threshold.
    """
    n, d = values.shape
    parent = gini_impurity(np.bincount(labels, minlength=N_CLASSES))
    best = None
    for f in range(d):
        order = np.argsort(values[:, f], kind="stable")
        col = values[order, f]
        lab = labels[order]
        onehot = np.zeros((n, N_CLASSES))
        onehot[np.arange(n), lab] = 1.0
        left_counts = np.cumsum(onehot, axis=0)  # counts after taking first i+1 rows
        total = left_counts[-1]
        # candidate boundaries: between consecutive distinct values
        boundaries = np.nonzero(col[:-1] < col[1:])[0]
        if boundaries.size == 0:
            continue
        nl = (boundaries + 1).astype(float)
        nr = n - nl
        lc = left_counts[boundaries]
        rc = total[None, :] - lc
        gini_l = 1.0 - np.sum((lc / nl[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((rc / nr[:, None]) ** 2, axis=1)
        gain = parent - (nl * gini_l + nr * gini_r) / n
        i = int(np.argmax(gain))
        # among near-equal gains pick the lowest threshold (first boundary)
        near = np.nonzero(gain >= gain[i] - _MIN_GAIN)[0]
        i = int(near[0])
        if gain[i] > _MIN_GAIN and (best is None or gain[i] > best[2] + _MIN_GAIN):
            b = boundaries[i]
            threshold = (col[b] + col[b + 1]) / 2.0
            best = (f, float(threshold), float(gain[i]))
    return best


def fit_tree(table: FeatureTable, max_depth: int = 8, min_samples_split: int = 10,
             rng_seed: int = 0) -> TreeNode:
    """Grow a CART tree; fully deterministic (the seed exists for interface parity)."""
    if table.labels is None:
        raise ValueError("fit_tree requires a labeled table")
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    return _grow(table.values, table.labels, depth=0,
                 max_depth=max_depth, min_samples_split=min_samples_split)


def _grow(values, labels, depth, max_depth, min_samples_split) -> TreeNode:
    hist = np.bincount(labels, minlength=N_CLASSES).astype(float)
    node = TreeNode(
        gini=gini_impurity(hist),
        sample_count=len(labels),
        class_histogram=hist,
        predicted_label=ToolCondition(int(np.argmax(hist))),
    )
    if node.gini == 0.0 or depth >= max_depth or len(labels) < min_samples_split:
        return node
    split = best_split(values, labels)
    if split is None:
        return node
    f, threshold, _ = split
    mask = values[:, f] <= threshold
    node.split_feature = f
    node.split_threshold = threshold
    node.left = _grow(values[mask], labels[mask], depth + 1, max_depth, min_samples_split)
    node.right = _grow(values[~mask], labels[~mask], depth + 1, max_depth, min_samples_split)
    return node


@dataclass(frozen=True)
class ImportanceRanking:
    """Per-feature impurity-decrease importances, descending."""

    entries: tuple[tuple[str, float], ...]
    has_splits: bool
    canonical_names: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    def to_csv(self) -> str:
        lines = ["feature,importance"]
        lines += [f"{name},{imp!r}" for name, imp in self.entries]
        return "\n".join(lines) + "\n"


def feature_importance(tree: TreeNode, table: FeatureTable) -> ImportanceRanking:
    """Total weighted impurity decrease per feature, normalized to sum 1."""
    d = len(table.feature_names)
    raw = np.zeros(d)
    total = tree.sample_count

    def walk(node: TreeNode):
        if node.is_leaf:
            return
        child = (node.left.sample_count * node.left.gini
                 + node.right.sample_count * node.right.gini) / node.sample_count
        raw[node.split_feature] += (node.sample_count / total) * (node.gini - child)
        walk(node.left)
        walk(node.right)

    walk(tree)
    s = raw.sum()
    has_splits = s > 0
    norm = raw / s if has_splits else raw
    order = sorted(range(d), key=lambda i: (-norm[i], i))
    entries = tuple((table.feature_names[i], float(norm[i])) for i in order)
    return ImportanceRanking(entries=entries, has_splits=has_splits,
                             canonical_names=tuple(table.feature_names))


def select_top_k(ranking: ImportanceRanking, k: int) -> list[str]:
    """The k highest-importance feature names, returned in canonical table order."""
    names = [name for name, _ in ranking.entries]
    if not 1 <= k <= len(names):
        raise ValueError(f"k must be in [1, {len(names)}], got {k}")
    chosen = set(names[:k])
    return [n for n in ranking.canonical_names if n in chosen]


def export_tree(tree: TreeNode, feature_names) -> str:
    """Render the tree as a DOT graph, one record per node."""
    lines = ["digraph tree {", '  node [shape=box, fontname="monospace"];']
    counter = [0]

    def emit(node: TreeNode) -> int:
        nid = counter[0]
        counter[0] += 1
        hist = "/".join(str(int(c)) for c in node.class_histogram)
        if node.is_leaf:
            label = (f"leaf: {node.predicted_label.display_name}\\n"
                     f"gini={node.gini:.4f} n={node.sample_count}\\nclasses={hist}")
        else:
            label = (f"{feature_names[node.split_feature]} <= {node.split_threshold:.6g}\\n"
                     f"gini={node.gini:.4f} n={node.sample_count}\\nclasses={hist}")
        lines.append(f'  n{nid} [label="{label}"];')
        if not node.is_leaf:
            left_id = emit(node.left)
            right_id = emit(node.right)
            lines.append(f'  n{nid} -> n{left_id} [label="yes"];')
            lines.append(f'  n{nid} -> n{right_id} [label="no"];')
        return nid

    emit(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"
