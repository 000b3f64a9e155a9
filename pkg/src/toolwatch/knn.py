"""Exact k-nearest-neighbor classifier with inspectable neighbor lists."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from toolwatch.dataset import ToolCondition
from toolwatch.features import FeatureTable

METRICS = ("manhattan", "euclidean", "minkowski", "cosine")
WEIGHTINGS = ("uniform", "inverse_distance")
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class KnnHyperparameters:
    n_neighbors: int = 4
    metric: str = "manhattan"
    weighting: str = "inverse_distance"
    p: float = 2.0  # minkowski exponent

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be at least 1")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")
        if self.metric == "minkowski" and self.p < 1:
            raise ValueError("minkowski p must be >= 1")


def vanilla_hyperparameters() -> KnnHyperparameters:
    """Conventional un-tuned defaults."""
    return KnnHyperparameters(n_neighbors=5, metric="euclidean", weighting="uniform")


def distance(a, b, metric: str = "manhattan", p: float = 2.0) -> float:
    """Distance between two feature vectors under the given metric."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(_pairwise(a[None, :], b, metric, p)[0])


def _pairwise(matrix: np.ndarray, q: np.ndarray, metric: str, p: float) -> np.ndarray:
    diff = matrix - q
    if metric == "manhattan":
        return np.abs(diff).sum(axis=1)
    if metric == "euclidean":
        return np.sqrt((diff ** 2).sum(axis=1))
    if metric == "minkowski":
        return (np.abs(diff) ** p).sum(axis=1) ** (1.0 / p)
    if metric == "cosine":
        qn = np.linalg.norm(q)
        mn = np.linalg.norm(matrix, axis=1)
        if qn == 0 or np.any(mn == 0):
            raise ValueError("cosine distance undefined for a zero vector")
        return 1.0 - (matrix @ q) / (mn * qn)
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class Neighbor:
    index: int
    distance: float
    weight: float
    label: ToolCondition


@dataclass(frozen=True)
class Prediction:
    label: ToolCondition
    scores: np.ndarray  # 3 per-class weighted scores
    neighbors: tuple[Neighbor, ...]


@dataclass(frozen=True)
class KnnModel:
    """Immutable fitted classifier; vectors kept in raw feature units."""

    feature_names: tuple[str, ...]
    vectors: np.ndarray  # raw training vectors, shape (n, d)
    labels: np.ndarray  # int ToolCondition values
    hyperparameters: KnnHyperparameters
    standardize: bool
    feature_means: np.ndarray
    feature_stds: np.ndarray

    def __post_init__(self):
        for name in ("vectors", "labels", "feature_means", "feature_stds"):
            arr = np.asarray(getattr(self, name), dtype=int if name == "labels" else float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.vectors) != len(self.labels):
            raise ValueError("vector/label count mismatch")
        if len(self.vectors) < self.hyperparameters.n_neighbors:
            raise ValueError("fewer training rows than n_neighbors")
        scaled = (self.vectors - self.feature_means) / self.feature_stds
        scaled.setflags(write=False)
        object.__setattr__(self, "_scaled", scaled)

    @property
    def n_training(self) -> int:
        return len(self.vectors)

    def scale(self, rows: np.ndarray) -> np.ndarray:
        return (np.asarray(rows, dtype=float) - self.feature_means) / self.feature_stds


def fit(table: FeatureTable, hp: KnnHyperparameters, standardize: bool = True) -> KnnModel:
    """Fit a KNN model; with standardization, columns are z-scored per feature.

    Zero-variance features cannot be z-scored and are dropped with a warning.
    """
    if table.labels is None:
        raise ValueError("fit requires a labeled table")
    if len(table) < hp.n_neighbors:
        raise ValueError(f"need at least {hp.n_neighbors} rows, got {len(table)}")
    values = table.values
    names = table.feature_names
    if standardize:
        means = values.mean(axis=0)
        stds = values.std(axis=0, ddof=1) if len(table) > 1 else np.ones(values.shape[1])
        keep = stds > 0
        if not keep.all():
            dropped = [n for n, k in zip(names, keep) if not k]
            warnings.warn(f"dropping zero-variance features: {dropped}")
            values = values[:, keep]
            names = tuple(n for n, k in zip(names, keep) if k)
            means, stds = means[keep], stds[keep]
    else:
        means = np.zeros(values.shape[1])
        stds = np.ones(values.shape[1])
    return KnnModel(feature_names=names, vectors=values, labels=table.labels,
                    hyperparameters=hp, standardize=standardize,
                    feature_means=means, feature_stds=stds)


def predict(model: KnnModel, x) -> Prediction:
    """Classify one raw feature vector by exact exhaustive neighbor search."""
    x = np.asarray(x, dtype=float)
    if x.shape != (len(model.feature_names),):
        raise ValueError(f"expected {len(model.feature_names)} features, got {x.shape}")
    hp = model.hyperparameters
    dists = _pairwise(model._scaled, model.scale(x), hp.metric, hp.p)
    k = hp.n_neighbors
    # stable sort keeps the lowest training index on distance ties
    idx = np.argsort(dists, kind="stable")[:k]
    nd = dists[idx]
    if hp.weighting == "uniform":
        w = np.ones(k)
    else:
        zero = nd == 0.0
        if zero.any():
            # 1/d is singular at 0: exact matches take all the weight
            w = np.where(zero, 1.0, 0.0)
        else:
            w = 1.0 / nd
    scores = np.zeros(3)
    np.add.at(scores, model.labels[idx], w)
    label = ToolCondition(int(np.argmax(scores)))  # argmax ties -> lowest severity
    neighbors = tuple(Neighbor(index=int(i), distance=float(d), weight=float(wi),
                               label=ToolCondition(int(model.labels[i])))
                      for i, d, wi in zip(idx, nd, w))
    return Prediction(label=label, scores=scores, neighbors=neighbors)


def predict_batch(model: KnnModel, rows) -> list[Prediction]:
    rows = np.asarray(rows, dtype=float)
    if rows.size == 0:
        return []
    return [predict(model, row) for row in rows]


def predict_labels(model: KnnModel, rows) -> np.ndarray:
    """Labels only, vectorized over queries (same contract as predict_batch)."""
    rows = np.asarray(rows, dtype=float)
    if rows.size == 0:
        return np.array([], dtype=int)
    hp = model.hyperparameters
    q = model.scale(rows)
    t = model._scaled
    if hp.metric == "manhattan":
        d = np.abs(q[:, None, :] - t[None, :, :]).sum(axis=2)
    elif hp.metric == "euclidean":
        d = np.sqrt(((q[:, None, :] - t[None, :, :]) ** 2).sum(axis=2))
    elif hp.metric == "minkowski":
        d = (np.abs(q[:, None, :] - t[None, :, :]) ** hp.p).sum(axis=2) ** (1.0 / hp.p)
    else:
        qn = np.linalg.norm(q, axis=1)
        tn = np.linalg.norm(t, axis=1)
        if np.any(qn == 0) or np.any(tn == 0):
            raise ValueError("cosine distance undefined for a zero vector")
        d = 1.0 - (q @ t.T) / (qn[:, None] * tn[None, :])
    k = hp.n_neighbors
    idx = np.argsort(d, axis=1, kind="stable")[:, :k]
    nd = np.take_along_axis(d, idx, axis=1)
    if hp.weighting == "uniform":
        w = np.ones_like(nd)
    else:
        zero = nd == 0.0
        w = np.where(zero, 1.0, 0.0)
        safe = np.where(nd == 0.0, 1.0, nd)
        w = np.where(zero.any(axis=1)[:, None], w, 1.0 / safe)
    labels = model.labels[idx]
    scores = np.zeros((len(rows), 3))
    for c in range(3):
        scores[:, c] = np.where(labels == c, w, 0.0).sum(axis=1)
    return np.argmax(scores, axis=1)


def class_scores(model: KnnModel, rows) -> np.ndarray:
    """Per-class weighted scores for each query row, shape (n, 3)."""
    return np.stack([predict(model, row).scores for row in np.asarray(rows, dtype=float)])


def save_model(model: KnnModel, path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "feature_names": list(model.feature_names),
        "hyperparameters": {
            "n_neighbors": model.hyperparameters.n_neighbors,
            "metric": model.hyperparameters.metric,
            "weighting": model.hyperparameters.weighting,
            "p": model.hyperparameters.p,
        },
        "standardize": model.standardize,
        "feature_means": model.feature_means.tolist(),
        "feature_stds": model.feature_stds.tolist(),
        "vectors": model.vectors.tolist(),
        "labels": model.labels.tolist(),
    }
    Path(path).write_text(json.dumps(payload))


def load_model(path) -> KnnModel:
    path = Path(path)
    if not path.exists():
        raise ValueError(f"model file not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"model file {path} is not valid JSON: {exc}") from exc
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r} in {path}")
    hp = KnnHyperparameters(**payload["hyperparameters"])
    return KnnModel(
        feature_names=tuple(payload["feature_names"]),
        vectors=np.array(payload["vectors"]),
        labels=np.array(payload["labels"]),
        hyperparameters=hp,
        standardize=payload["standardize"],
        feature_means=np.array(payload["feature_means"]),
        feature_stds=np.array(payload["feature_stds"]),
    )
