import numpy as np
import pytest
import scipy.stats

from toolwatch.dataset import ToolCondition, Window
from toolwatch.features import (
    FEATURE_NAMES,
    FeatureTable,
    build_table,
    extract,
    read_csv,
    write_csv,
)


def window(values, label=None):
    return Window(samples=np.asarray(values, dtype=float), label=label)


class TestExtract:
    def test_constant_window(self):
        fv = extract(window([5, 5, 5, 5]))
        expected = {"mean": 5, "median": 5, "variance": 0, "standard_deviation": 0,
                    "standard_error": 0, "maximum": 5, "minimum": 5, "range": 0,
                    "summation": 20, "skewness": 0, "kurtosis": 0, "mode": 5}
        for name, want in expected.items():
            assert fv[name] == pytest.approx(want)

    def test_one_two_three_four(self):
        fv = extract(window([1, 2, 3, 4]))
        assert fv["mean"] == pytest.approx(2.5)
        assert fv["median"] == pytest.approx(2.5)
        assert fv["summation"] == pytest.approx(10)
        assert fv["minimum"] == 1
        assert fv["maximum"] == 4
        assert fv["range"] == 3
        assert fv["variance"] == pytest.approx(5 / 3)
        assert fv["standard_deviation"] == pytest.approx(1.2909944)
        assert fv["standard_error"] == pytest.approx(0.6454972)
        assert fv["skewness"] == pytest.approx(0, abs=1e-12)
        assert fv["kurtosis"] == pytest.approx(-1.2)
        # all four values fall in distinct bins; tie -> lowest bin center
        assert fv["mode"] == pytest.approx(1 + 0.5 * 3 / 64)

    def test_feature_count_and_order(self, random_window):
        fv = extract(random_window)
        assert len(fv.values) == 12
        assert tuple(fv.as_dict()) == FEATURE_NAMES

    def test_matches_direct_formula_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            n = int(rng.integers(4, 400))
            x = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 10), n)
            fv = extract(window(x))
            assert fv["mean"] == pytest.approx(x.mean(), rel=1e-9)
            assert fv["median"] == pytest.approx(np.median(x), rel=1e-9)
            assert fv["variance"] == pytest.approx(x.var(ddof=1), rel=1e-9)
            assert fv["standard_deviation"] == pytest.approx(x.std(ddof=1), rel=1e-9)
            assert fv["standard_error"] == pytest.approx(x.std(ddof=1) / np.sqrt(n), rel=1e-9)
            assert fv["summation"] == pytest.approx(x.sum(), rel=1e-9)
            assert fv["skewness"] == pytest.approx(scipy.stats.skew(x, bias=False), abs=1e-9)
            assert fv["kurtosis"] == pytest.approx(
                scipy.stats.kurtosis(x, fisher=True, bias=False), abs=1e-9)

    def test_scale_equivariance(self, random_window):
        c = 3.7
        base = extract(random_window)
        scaled = extract(window(random_window.samples * c))
        for name in ("mean", "median", "standard_deviation", "standard_error",
                     "maximum", "minimum", "range", "summation", "mode"):
            assert scaled[name] == pytest.approx(c * base[name], rel=1e-9)
        assert scaled["skewness"] == pytest.approx(base["skewness"], abs=1e-9)
        assert scaled["kurtosis"] == pytest.approx(base["kurtosis"], abs=1e-9)

    def test_shift_equivariance(self, random_window):
        c = 11.25
        n = len(random_window)
        base = extract(random_window)
        shifted = extract(window(random_window.samples + c))
        for name in ("mean", "median", "maximum", "minimum", "mode"):
            assert shifted[name] == pytest.approx(base[name] + c, rel=1e-9)
        for name in ("standard_deviation", "variance", "standard_error", "range"):
            assert shifted[name] == pytest.approx(base[name], rel=1e-9)
        assert shifted["summation"] == pytest.approx(base["summation"] + n * c, rel=1e-9)
        assert shifted["skewness"] == pytest.approx(base["skewness"], abs=1e-9)
        assert shifted["kurtosis"] == pytest.approx(base["kurtosis"], abs=1e-9)

    def test_symmetric_window_zero_skewness(self):
        rng = np.random.default_rng(23)
        x = rng.normal(0, 2, 100)
        mirrored = np.concatenate([x, 2 * x.mean() - x])
        assert abs(extract(window(mirrored))["skewness"]) < 1e-9

    def test_mode_tracks_densest_bin(self):
        x = np.concatenate([np.zeros(50) + 0.01 * np.arange(50), [10.0, 20.0, 30.0]])
        fv = extract(window(x))
        assert fv["mode"] < 1.0


class TestBuildTable:
    def test_row_per_window_order_preserved(self):
        rng = np.random.default_rng(5)
        windows = [Window(samples=rng.normal(i, 1, 32),
                          label=ToolCondition(i % 3)) for i in range(9)]
        table = build_table(windows)
        assert len(table) == 9
        assert table.values[3][0] == pytest.approx(extract(windows[3])["mean"])
        permuted = build_table(windows[::-1])
        assert np.allclose(permuted.values, table.values[::-1])

    def test_class_counts_sum_to_rows(self):
        rng = np.random.default_rng(6)
        windows = [Window(samples=rng.normal(0, 1, 16),
                          label=ToolCondition(i % 3)) for i in range(10)]
        table = build_table(windows)
        assert sum(table.class_counts.values()) == len(table)

    def test_single_window(self, random_window):
        assert len(build_table([random_window])) == 1


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path, random_window):
        table = build_table([random_window] * 3)
        path = tmp_path / "feat.csv"
        write_csv(table, path)
        header = path.read_text().splitlines()[0]
        assert header == ("mean,median,kurtosis,skewness,standard_error,variance,"
                          "maximum,minimum,range,summation,standard_deviation,mode,label")
        loaded = read_csv(path)
        assert np.allclose(loaded.values, table.values)
        assert np.array_equal(loaded.labels, table.labels)

    def test_select_preserves_canonical_order(self, random_window):
        table = build_table([random_window] * 2)
        sub = table.select(["mode", "mean", "skewness"])
        assert sub.feature_names == ("mean", "skewness", "mode")
