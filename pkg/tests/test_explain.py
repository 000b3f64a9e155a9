import numpy as np
import pytest

from toolwatch import knn
from toolwatch.explain import (
    lime_explain,
    neighbor_plot_data,
    pca_project,
    permutation_importance,
)
from toolwatch.features import FeatureTable
from toolwatch.knn import KnnHyperparameters

from conftest import cluster_table


def dominant_feature_table(n_per_class=40, n_features=6, rng_seed=0, informative=0):
    """Only one feature carries the class signal; the rest are pure noise."""
    rng = np.random.default_rng(rng_seed)
    values = rng.normal(0, 1, (3 * n_per_class, n_features))
    labels = np.repeat([0, 1, 2], n_per_class)
    values[:, informative] = labels * 8.0 + rng.normal(0, 0.5, len(labels))
    return FeatureTable(feature_names=tuple(f"f{i}" for i in range(n_features)),
                        values=values, labels=labels)


class TestPermutationImportance:
    def test_constant_feature_exactly_zero(self):
        table = dominant_feature_table(rng_seed=1)
        values = table.values.copy()
        values[:, 3] = 2.5
        # keep the constant column: standardization would drop it
        t = FeatureTable(feature_names=table.feature_names, values=values,
                         labels=table.labels)
        model = knn.fit(t, KnnHyperparameters(n_neighbors=4), standardize=False)
        gi = permutation_importance(model, t, repeats=5, rng_seed=0)
        assert gi.to_csv().startswith("feature,mean,std")
        assert dict((n, m) for n, m, _ in gi.entries)["f3"] == 0.0

    def test_sole_informative_feature_importance(self):
        train = dominant_feature_table(rng_seed=2)
        # held-out evaluation table from the same process, so noise features
        # cannot identify individual rows
        holdout = dominant_feature_table(rng_seed=22)
        model = knn.fit(train, KnnHyperparameters(n_neighbors=4,
                                                  weighting="inverse_distance"))
        gi = permutation_importance(model, holdout, repeats=30, rng_seed=7)
        top_name, top_mean, _ = gi.entries[0]
        assert top_name == "f0"
        baseline = float(
            (knn.predict_labels(model, holdout.values) == holdout.labels).mean())
        assert abs(top_mean - (baseline - 1.0 / 3.0)) < 0.05

    def test_deterministic_per_seed(self):
        table = dominant_feature_table(rng_seed=3, n_per_class=15)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=3))
        a = permutation_importance(model, table, repeats=3, rng_seed=5)
        b = permutation_importance(model, table, repeats=3, rng_seed=5)
        assert a.entries == b.entries

    def test_entries_descending(self):
        table = dominant_feature_table(rng_seed=4, n_per_class=15)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=3))
        gi = permutation_importance(model, table, repeats=4, rng_seed=0)
        means = [m for _, m, _ in gi.entries]
        assert means == sorted(means, reverse=True)

    def test_duplicated_feature_dilutes(self):
        base = dominant_feature_table(rng_seed=6, n_features=5)
        model_single = knn.fit(base, KnnHyperparameters(n_neighbors=4))
        single = dict((n, m) for n, m, _ in permutation_importance(
            model_single, base, repeats=10, rng_seed=1).entries)["f0"]
        dup_values = np.hstack([base.values, base.values[:, [0]]])
        dup = FeatureTable(feature_names=base.feature_names + ("f0_copy",),
                           values=dup_values, labels=base.labels)
        model_dup = knn.fit(dup, KnnHyperparameters(n_neighbors=4))
        diluted = dict((n, m) for n, m, _ in permutation_importance(
            model_dup, dup, repeats=10, rng_seed=1).entries)["f0"]
        assert diluted <= single + 0.05

    def test_unlabeled_rejected(self):
        table = dominant_feature_table(rng_seed=1)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=3))
        unlabeled = FeatureTable(feature_names=table.feature_names, values=table.values)
        with pytest.raises(ValueError, match="label"):
            permutation_importance(model, unlabeled, repeats=3)


class ConstantScoreModel:
    """Stand-in with the minimal KnnModel surface lime_explain touches."""

    def __init__(self, d):
        self.feature_names = tuple(f"f{i}" for i in range(d))
        self.feature_stds = np.ones(d)
        self.feature_means = np.zeros(d)


class TestLimeExplain:
    def test_constant_model_zero_coefficients(self, monkeypatch):
        table = cluster_table(means=(0.0, 0.0001, 0.0002), n_per_class=10,
                              n_features=4, rng_seed=0)
        labels = np.zeros(len(table), dtype=int)
        t = FeatureTable(feature_names=table.feature_names, values=table.values,
                         labels=labels)
        # all-one-class training data: scores are identical everywhere
        model = knn.fit(t, KnnHyperparameters(n_neighbors=3, weighting="uniform"))
        local = lime_explain(model, t.values[0], n_samples=200, rng_seed=0)
        for coefs in local.coefficients.values():
            for v in coefs.values():
                assert abs(v) < 1e-6

    def test_dominant_feature_positive_coefficient(self):
        table = dominant_feature_table(rng_seed=8)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=4,
                                                  weighting="inverse_distance"))
        instance = table.values[5].copy()  # class 0 region: low f0
        local = lime_explain(model, instance, n_samples=500, rng_seed=3)
        coefs = local.coefficients["Good Condition"]
        # increasing f0 moves away from class 0, so its coefficient is negative
        # and dominates all noise features
        assert abs(coefs["f0"]) > max(abs(coefs[f"f{i}"]) for i in range(1, 6))
        assert coefs["f0"] < 0

    def test_sign_matches_finite_difference(self):
        table = dominant_feature_table(rng_seed=9)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=4,
                                                  weighting="inverse_distance"))
        instance = table.values[45].copy()  # class 1 region
        local = lime_explain(model, instance, n_samples=500, rng_seed=4)
        h = model.feature_stds[0] * 0.5

        def good_score(x):
            p = knn.predict(model, x)
            return p.scores[0] / p.scores.sum()

        up = instance.copy(); up[0] += h
        down = instance.copy(); down[0] -= h
        slope = good_score(up) - good_score(down)
        assert np.sign(local.coefficients["Good Condition"]["f0"]) == np.sign(slope)

    def test_deterministic(self):
        table = dominant_feature_table(rng_seed=10, n_per_class=15)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=3))
        a = lime_explain(model, table.values[0], n_samples=100, rng_seed=6)
        b = lime_explain(model, table.values[0], n_samples=100, rng_seed=6)
        assert a.coefficients == b.coefficients
        assert a.r_squared == b.r_squared

    def test_all_features_reported_with_r2_in_range(self):
        table = dominant_feature_table(rng_seed=11, n_per_class=15)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=3))
        local = lime_explain(model, table.values[0], n_samples=100, rng_seed=0)
        for coefs in local.coefficients.values():
            assert tuple(coefs) == model.feature_names
        assert 0.0 <= local.r_squared <= 1.0

    def test_too_few_samples_rejected(self):
        table = dominant_feature_table(rng_seed=12, n_per_class=10)
        model = knn.fit(table, KnnHyperparameters(n_neighbors=3))
        with pytest.raises(ValueError, match="50"):
            lime_explain(model, table.values[0], n_samples=10)


class TestPcaProject:
    def test_planar_data_full_variance(self):
        rng = np.random.default_rng(0)
        basis = rng.normal(0, 1, (2, 10))
        coords = rng.normal(0, 3, (50, 2))
        values = coords @ basis + rng.uniform(-1, 1, 10)
        table = FeatureTable(feature_names=tuple(f"f{i}" for i in range(10)),
                             values=values)
        proj = pca_project(table)
        assert proj.explained_variance.sum() == pytest.approx(1.0, abs=1e-9)

    def test_component_ordering(self):
        rng = np.random.default_rng(1)
        table = FeatureTable(feature_names=tuple(f"f{i}" for i in range(10)),
                             values=rng.normal(0, 1, (80, 10)))
        proj = pca_project(table)
        assert proj.explained_variance[0] >= proj.explained_variance[1]
        assert np.allclose(proj.components @ proj.components.T, np.eye(2), atol=1e-9)

    def test_matches_power_iteration_oracle(self):
        rng = np.random.default_rng(2)
        for trial in range(10):
            values = rng.normal(0, 1, (40, 5)) @ rng.normal(0, 1, (5, 5))
            table = FeatureTable(feature_names=tuple(f"f{i}" for i in range(5)),
                                 values=values)
            proj = pca_project(table)
            z = (values - values.mean(0)) / values.std(0, ddof=1)
            oracle = _power_iteration_top2(np.cov(z.T, ddof=1))
            for i in range(2):
                dot = abs(float(proj.components[i] @ oracle[i]))
                assert dot == pytest.approx(1.0, abs=1e-6)

    def test_collinear_rejected(self):
        base = np.arange(10, dtype=float)
        values = np.stack([base, 2 * base, -base]).T
        table = FeatureTable(feature_names=("a", "b", "c"), values=values)
        with pytest.raises(ValueError, match="rank"):
            pca_project(table)

    def test_sign_convention(self):
        rng = np.random.default_rng(3)
        table = FeatureTable(feature_names=tuple(f"f{i}" for i in range(4)),
                             values=rng.normal(0, 1, (30, 4)))
        proj = pca_project(table)
        for comp in proj.components:
            assert comp[np.argmax(np.abs(comp))] > 0


def _power_iteration_top2(cov, iters=5000):
    rng = np.random.default_rng(123)
    comps = []
    mat = cov.copy()
    for _ in range(2):
        v = rng.normal(0, 1, cov.shape[0])
        for _ in range(iters):
            v = mat @ v
            v /= np.linalg.norm(v)
        lam = float(v @ mat @ v)
        comps.append(v.copy())
        mat = mat - lam * np.outer(v, v)
    return comps


class TestNeighborPlotData:
    def test_segment_count(self, separable_table):
        model = knn.fit(separable_table, KnnHyperparameters(n_neighbors=4))
        proj = pca_project(separable_table)
        queries = separable_table.values[:5] + 0.01
        data = neighbor_plot_data(model, queries, proj)
        assert len(data.segments) == 20
        assert len(data.query_points) == 5

    def test_zero_queries(self, separable_table):
        model = knn.fit(separable_table, KnnHyperparameters(n_neighbors=4))
        proj = pca_project(separable_table)
        data = neighbor_plot_data(model, np.empty((0, 10)), proj)
        assert len(data.segments) == 0
        assert len(data.training_points) == len(separable_table)

    def test_segment_endpoints_reference_training_points(self, separable_table):
        model = knn.fit(separable_table, KnnHyperparameters(n_neighbors=3))
        proj = pca_project(separable_table)
        data = neighbor_plot_data(model, separable_table.values[:2], proj)
        for _, t in data.segments:
            assert 0 <= t < len(data.training_points)
        csv = data.to_csv()
        assert csv.splitlines()[0] == "kind,index,x,y,label"
