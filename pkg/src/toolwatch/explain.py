"""Model-agnostic white-box layer: permutation importance, local linear
surrogate explanations, and 2-D principal-component projections."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from toolwatch import knn
from toolwatch.dataset import ToolCondition
from toolwatch.features import FeatureTable
from toolwatch.knn import KnnModel

LIME_RIDGE = 1e-3


@dataclass(frozen=True)
class GlobalExplanation:
    """Per-feature accuracy drop under column shuffling: mean +/- std, descending."""

    entries: tuple[tuple[str, float, float], ...]  # (feature, mean, std)

    def to_csv(self) -> str:
        lines = ["feature,mean,std"]
        lines += [f"{name},{m!r},{s!r}" for name, m, s in self.entries]
        return "\n".join(lines) + "\n"

    def to_table_text(self) -> str:
        lines = ["Weight            Feature"]
        for name, m, s in self.entries:
            lines.append(f"{m:.4f} ± {s:.4f}   {name}")
        return "\n".join(lines) + "\n"


def permutation_importance(model: KnnModel, table: FeatureTable, repeats: int = 10,
                           rng_seed: int = 0) -> GlobalExplanation:
    """Mean accuracy drop when one feature column is shuffled, over repeats."""
    if repeats < 2:
        raise ValueError("need at least 2 repeats")
    if table.labels is None:
        raise ValueError("permutation importance requires a labeled table")
    if tuple(table.feature_names) != tuple(model.feature_names):
        raise ValueError("table features must match the model's features")
    rng = np.random.default_rng(rng_seed)
    baseline = float((knn.predict_labels(model, table.values) == table.labels).mean())
    entries = []
    for f, name in enumerate(table.feature_names):
        drops = []
        for _ in range(repeats):
            shuffled = table.values.copy()
            shuffled[:, f] = shuffled[rng.permutation(len(table)), f]
            acc = float((knn.predict_labels(model, shuffled) == table.labels).mean())
            drops.append(baseline - acc)
        entries.append((name, float(np.mean(drops)), float(np.std(drops))))
    entries.sort(key=lambda e: (-e[1], model.feature_names.index(e[0])))
    return GlobalExplanation(entries=tuple(entries))


@dataclass(frozen=True)
class LocalExplanation:
    """Weighted linear surrogate around one instance."""

    instance: np.ndarray
    predicted_label: ToolCondition
    coefficients: dict[str, dict[str, float]]  # class display name -> feature -> coef
    r_squared: float  # surrogate fit quality for the predicted class
    kernel_width: float

    def to_json(self) -> str:
        return json.dumps({
            "instance": self.instance.tolist(),
            "predicted_label": self.predicted_label.display_name,
            "coefficients": self.coefficients,
            "r_squared": self.r_squared,
            "kernel_width": self.kernel_width,
        }, indent=2)


def lime_explain(model: KnnModel, instance, n_samples: int = 500,
                 kernel_width: Optional[float] = None, rng_seed: int = 0) -> LocalExplanation:
    """Explain one prediction with a locally weighted linear surrogate.

    Perturbations are Gaussian around the instance with per-feature std equal
    to the training std; samples are weighted by exp(-d^2 / kernel_width^2)
    with d the standardized euclidean distance to the instance, and a ridge-
    damped weighted least squares fit per class maps standardized feature
    offsets to the model's normalized class scores.
    """
    instance = np.asarray(instance, dtype=float)
    d = len(model.feature_names)
    if instance.shape != (d,):
        raise ValueError(f"expected {d} features, got {instance.shape}")
    if n_samples < 50:
        raise ValueError("need at least 50 perturbation samples")
    if kernel_width is None:
        kernel_width = 0.75 * np.sqrt(d)
    if kernel_width <= 0:
        raise ValueError("kernel_width must be positive")

    rng = np.random.default_rng(rng_seed)
    stds = np.where(model.feature_stds > 0, model.feature_stds, 1.0)
    perturbed = instance + rng.normal(0.0, 1.0, size=(n_samples, d)) * stds

    scores = np.stack([knn.predict(model, row).scores for row in perturbed])
    sums = scores.sum(axis=1, keepdims=True)
    sums[sums == 0] = 1.0
    targets = scores / sums

    z = (perturbed - instance) / stds
    dist = np.linalg.norm(z, axis=1)
    w = np.exp(-(dist ** 2) / kernel_width ** 2)
    if w.max() < 1e-12:
        raise ValueError("all perturbation weights vanish; increase kernel_width")

    design = np.hstack([np.ones((n_samples, 1)), z])
    wd = design * w[:, None]
    gram = design.T @ wd
    gram += LIME_RIDGE * np.eye(d + 1)
    gram[0, 0] -= LIME_RIDGE  # leave the intercept unpenalized

    prediction = knn.predict(model, instance)
    coefficients: dict[str, dict[str, float]] = {}
    r2_for_predicted = 0.0
    for c in ToolCondition:
        y = targets[:, int(c)]
        beta = np.linalg.solve(gram, wd.T @ y)
        coefficients[c.display_name] = {
            name: float(b) for name, b in zip(model.feature_names, beta[1:])
        }
        fitted = design @ beta
        wmean = np.average(y, weights=w)
        ss_res = float(np.sum(w * (y - fitted) ** 2))
        ss_tot = float(np.sum(w * (y - wmean) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        if c == prediction.label:
            r2_for_predicted = float(min(max(r2, 0.0), 1.0))
    return LocalExplanation(instance=instance, predicted_label=prediction.label,
                            coefficients=coefficients, r_squared=r2_for_predicted,
                            kernel_width=float(kernel_width))


@dataclass(frozen=True)
class Projection2D:
    """Top-2 principal components of the standardized feature matrix."""

    components: np.ndarray  # shape (2, d), orthonormal rows
    explained_variance: np.ndarray  # 2 descending fractions in [0, 1]
    points: np.ndarray  # projected rows, shape (n, 2)
    labels: Optional[np.ndarray]
    column_means: np.ndarray
    column_stds: np.ndarray

    def transform(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        z = (rows - self.column_means) / self.column_stds
        return z @ self.components.T


def pca_project(table: FeatureTable, n_components: int = 2) -> Projection2D:
    """Project standardized feature rows onto the top-2 covariance eigenvectors.

    Sign convention: each component's largest-magnitude loading is positive.
    """
    if n_components != 2:
        raise ValueError("only 2-component projections are supported")
    if len(table) < 3:
        raise ValueError("need at least 3 rows for a projection")
    values = table.values
    means = values.mean(axis=0)
    stds = values.std(axis=0, ddof=1)
    stds = np.where(stds > 0, stds, 1.0)
    z = (values - means) / stds
    cov = np.cov(z.T, ddof=1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    if eigvals[1] <= 1e-12 * max(eigvals[0], 1.0):
        raise ValueError("feature matrix is rank-deficient (collinear points)")
    components = eigvecs[:, order[:2]].T
    for i in range(2):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]
    total = eigvals.sum()
    explained = eigvals[:2] / total if total > 0 else np.zeros(2)
    return Projection2D(components=components, explained_variance=explained,
                        points=z @ components.T, labels=table.labels,
                        column_means=means, column_stds=stds)


@dataclass(frozen=True)
class NeighborPlotData:
    """Everything needed to draw a training-cloud scatter with query neighbors."""

    training_points: np.ndarray  # (n, 2)
    training_labels: np.ndarray
    query_points: np.ndarray  # (m, 2)
    segments: tuple[tuple[int, int], ...]  # (query index, training index)

    def to_csv(self) -> str:
        lines = ["kind,index,x,y,label"]
        for i, (p, lab) in enumerate(zip(self.training_points.tolist(), self.training_labels)):
            lines.append(f"train,{i},{p[0]!r},{p[1]!r},{int(lab)}")
        for i, p in enumerate(self.query_points.tolist()):
            lines.append(f"query,{i},{p[0]!r},{p[1]!r},")
        for q, t in self.segments:
            lines.append(f"segment,{q},,,{t}")
        return "\n".join(lines) + "\n"


def neighbor_plot_data(model: KnnModel, queries: Sequence, projection: Projection2D) -> NeighborPlotData:
    """Project the training cloud and each query with its chosen neighbors."""
    training_points = projection.transform(model.vectors)
    queries = np.asarray(queries, dtype=float).reshape(-1, len(model.feature_names))
    segments = []
    query_points = np.zeros((len(queries), 2))
    for qi, q in enumerate(queries):
        query_points[qi] = projection.transform(q[None, :])[0]
        for nb in knn.predict(model, q).neighbors:
            segments.append((qi, nb.index))
    return NeighborPlotData(training_points=training_points,
                            training_labels=np.asarray(model.labels),
                            query_points=query_points, segments=tuple(segments))
