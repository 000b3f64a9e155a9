"""White-box tool condition monitoring pipeline.

Raw milling force signals -> statistical features -> decision-tree feature
selection -> weighted KNN classification, with confusion-matrix/Type-2
evaluation, grid-search tuning, and global/local model-agnostic explanations.
"""

from toolwatch.dataset import (
    GeneratorConfig,
    SignalSeries,
    ToolCondition,
    Window,
    augment,
    load_signal,
    make_windows,
    remove_outliers,
    synthesize,
)
from toolwatch.features import FEATURE_NAMES, FeatureTable, FeatureVector, build_table, extract
from toolwatch.knn import KnnHyperparameters, KnnModel, Prediction, distance, fit, predict, predict_batch

__all__ = [
    "FEATURE_NAMES",
    "FeatureTable",
    "FeatureVector",
    "GeneratorConfig",
    "KnnHyperparameters",
    "KnnModel",
    "Prediction",
    "SignalSeries",
    "ToolCondition",
    "Window",
    "augment",
    "build_table",
    "distance",
    "extract",
    "fit",
    "load_signal",
    "make_windows",
    "predict",
    "predict_batch",
    "remove_outliers",
    "synthesize",
]

__version__ = "0.1.0"
