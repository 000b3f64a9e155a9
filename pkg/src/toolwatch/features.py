"""Statistical feature extraction: 12 features per window, assembled into tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from toolwatch.dataset import ToolCondition, Window

FEATURE_NAMES = (
    "mean",
    "median",
    "kurtosis",
    "skewness",
    "standard_error",
    "variance",
    "maximum",
    "minimum",
    "range",
    "summation",
    "standard_deviation",
    "mode",
)

MODE_BINS = 64


@dataclass(frozen=True)
class FeatureVector:
    """The 12 statistical features of one window, in canonical order."""

    values: np.ndarray
    label: Optional[ToolCondition] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (len(FEATURE_NAMES),):
            raise ValueError(f"expected {len(FEATURE_NAMES)} feature values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_NAMES.index(name)])


def extract(window: Window) -> FeatureVector:
    """Compute the canonical 12-feature vector for one window.

    Sample (n-1) variance/std, adjusted Fisher-Pearson skewness, sample
    excess kurtosis.  A zero-variance window reports skewness = kurtosis = 0.
    Mode is the center of the fullest of 64 equal-width bins over [min, max],
    ties resolved to the lowest bin.
    """
    x = window.samples
    n = len(x)
    mean = x.mean()
    median = float(np.median(x))
    maximum = float(x.max())
    minimum = float(x.min())
    variance = float(x.var(ddof=1))
    std = math.sqrt(variance)
    se = std / math.sqrt(n)
    total = float(x.sum())

    if std == 0.0:
        skewness = 0.0
        kurtosis = 0.0
    else:
        dev = x - mean
        m2 = float(np.mean(dev ** 2))
        m3 = float(np.mean(dev ** 3))
        m4 = float(np.mean(dev ** 4))
        g1 = m3 / m2 ** 1.5
        skewness = g1 * math.sqrt(n * (n - 1)) / (n - 2)
        g2 = m4 / m2 ** 2 - 3.0
        kurtosis = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0)

    if maximum == minimum:
        mode = maximum
    else:
        counts, edges = np.histogram(x, bins=MODE_BINS, range=(minimum, maximum))
        idx = int(np.argmax(counts))  # argmax takes the first, i.e. lowest, bin on ties
        mode = float((edges[idx] + edges[idx + 1]) / 2.0)

    values = np.array([mean, median, kurtosis, skewness, se, variance,
                       maximum, minimum, maximum - minimum, total, std, mode])
    return FeatureVector(values=values, label=window.label)


@dataclass(frozen=True)
class FeatureTable:
    """A labeled feature matrix; rows align with feature_names columns."""

    feature_names: tuple[str, ...]
    values: np.ndarray  # shape (n_rows, n_features)
    labels: Optional[np.ndarray] = None  # int array of ToolCondition values, or None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[1] != len(self.feature_names):
            raise ValueError("values shape does not match feature_names")
        if values.shape[0] == 0:
            raise ValueError("feature table must not be empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature table contains non-finite values")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=int)
            object.__setattr__(self, "labels", labels)
            if labels.shape != (values.shape[0],):
                raise ValueError("labels length does not match row count")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def class_counts(self) -> dict[ToolCondition, int]:
        if self.labels is None:
            return {}
        return {cond: int((self.labels == cond).sum()) for cond in ToolCondition}

    def row(self, i: int) -> FeatureVector:
        if self.feature_names != FEATURE_NAMES:
            raise ValueError("row() only defined for full 12-feature tables")
        label = None if self.labels is None else ToolCondition(int(self.labels[i]))
        return FeatureVector(values=self.values[i], label=label)

    def select(self, names: Sequence[str]) -> "FeatureTable":
        """Project onto a feature subset, keeping this table's column order."""
        missing = [n for n in names if n not in self.feature_names]
        if missing:
            raise ValueError(f"unknown features: {missing}")
        kept = tuple(n for n in self.feature_names if n in set(names))
        idx = [self.feature_names.index(n) for n in kept]
        return FeatureTable(feature_names=kept, values=self.values[:, idx], labels=self.labels)

    def subset(self, row_indices) -> "FeatureTable":
        row_indices = np.asarray(row_indices, dtype=int)
        labels = None if self.labels is None else self.labels[row_indices]
        return FeatureTable(feature_names=self.feature_names,
                            values=self.values[row_indices], labels=labels)


def build_table(windows: Sequence[Window]) -> FeatureTable:
    """One feature row per window, input order preserved."""
    windows = list(windows)
    if not windows:
        raise ValueError("no windows to build a table from")
    rows = [extract(w) for w in windows]
    labeled = all(r.label is not None for r in rows)
    values = np.stack([r.values for r in rows])
    labels = np.array([int(r.label) for r in rows]) if labeled else None
    return FeatureTable(feature_names=FEATURE_NAMES, values=values, labels=labels)


def write_csv(table: FeatureTable, path) -> None:
    """Serialize as CSV with a trailing `label` column (blank when unlabeled)."""
    lines = [",".join(table.feature_names) + ",label"]
    for i in range(len(table)):
        cells = [repr(v) for v in table.values[i].tolist()]
        cells.append("" if table.labels is None else str(int(table.labels[i])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> FeatureTable:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError(f"{path}: empty feature table")
    header = lines[0].split(",")
    if header[-1] != "label":
        raise ValueError(f"{path}: last column must be 'label'")
    names = tuple(header[:-1])
    rows, labels = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        rows.append([float(c) for c in cells[:-1]])
        labels.append(cells[-1].strip())
    has_labels = all(labels)
    label_arr = np.array([int(v) for v in labels]) if has_labels else None
    return FeatureTable(feature_names=names, values=np.array(rows), labels=label_arr)
