import numpy as np
import pytest

from toolwatch.dataset import ToolCondition, Window
from toolwatch.features import FEATURE_NAMES, FeatureTable


def cluster_table(means, n_per_class=30, n_features=10, spread=1.0, rng_seed=0,
                  feature_names=None):
    """Gaussian class clusters located at `means` along every feature."""
    rng = np.random.default_rng(rng_seed)
    rows, labels = [], []
    for label, mu in enumerate(means):
        rows.append(rng.normal(mu, spread, size=(n_per_class, n_features)))
        labels.extend([label] * n_per_class)
    names = tuple(feature_names) if feature_names else tuple(f"f{i}" for i in range(n_features))
    return FeatureTable(feature_names=names, values=np.vstack(rows),
                        labels=np.array(labels))


@pytest.fixture
def separable_table():
    """Three classes 10 sigma apart: trivially separable."""
    return cluster_table(means=(0.0, 10.0, 20.0), n_per_class=30, rng_seed=7)


@pytest.fixture
def random_window():
    rng = np.random.default_rng(3)
    return Window(samples=rng.normal(0, 1, 256), label=ToolCondition.GOOD_CONDITION)
