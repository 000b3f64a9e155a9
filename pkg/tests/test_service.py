import numpy as np
import pytest
from fastapi.testclient import TestClient

from toolwatch import knn
from toolwatch.features import FEATURE_NAMES, FeatureTable
from toolwatch.knn import KnnHyperparameters
from toolwatch.service import create_app, resolve_port

MODEL_FEATURES = FEATURE_NAMES[:10]  # includes "skewness", drops two


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    rng = np.random.default_rng(0)
    n_per_class = 20
    values = np.vstack([
        rng.normal(mean, 1.0, (n_per_class, len(MODEL_FEATURES)))
        for mean in (0.0, 10.0, 20.0)
    ])
    labels = np.repeat([0, 1, 2], n_per_class)
    table = FeatureTable(feature_names=MODEL_FEATURES, values=values, labels=labels)
    model = knn.fit(table, KnnHyperparameters(n_neighbors=4, metric="manhattan",
                                              weighting="inverse_distance"))
    path = tmp_path_factory.mktemp("svc") / "model.json"
    knn.save_model(model, path)
    app = create_app(path)
    with TestClient(app) as c:
        c.model = model
        yield c


def feature_map(vector):
    return {name: float(v) for name, v in zip(MODEL_FEATURES, vector)}


class TestResolvePort:
    def test_default(self, monkeypatch):
        monkeypatch.delenv("TOOLWATCH_PORT", raising=False)
        assert resolve_port() == 8077

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("TOOLWATCH_PORT", "9001")
        assert resolve_port() == 9001

    def test_cli_beats_env(self, monkeypatch):
        monkeypatch.setenv("TOOLWATCH_PORT", "9001")
        assert resolve_port(7000) == 7000


class TestHealth:
    def test_metadata(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["model"]["feature_names"] == list(MODEL_FEATURES)
        assert body["model"]["training_size"] == 60
        assert body["model"]["hyperparameters"] == {
            "n_neighbors": 4, "metric": "manhattan", "weighting": "inverse_distance"}
        assert body["model"]["class_names"] == [
            "Good Condition", "Initial Wear", "Progressed Wear"]


class TestModelEndpoints:
    def test_importance_shape_and_caching(self, client):
        first = client.get("/model/importance")
        second = client.get("/model/importance")
        assert first.status_code == 200
        assert first.content == second.content
        entries = first.json()["entries"]
        assert [set(e) for e in entries] == [{"feature", "mean", "std"}] * 10
        means = [e["mean"] for e in entries]
        assert means == sorted(means, reverse=True)

    def test_projection(self, client):
        body = client.get("/model/projection").json()
        assert len(body["points"]) == 60
        assert len(body["explained_variance"]) == 2
        assert {p["label"] for p in body["points"]} == {0, 1, 2}
        for p in body["points"][:5]:
            assert np.isfinite([p["x"], p["y"]]).all()


class TestPredict:
    def test_training_row_returns_stored_label(self, client):
        model = client.model
        for row in (0, 25, 59):
            r = client.post("/predict", json={"features": feature_map(model.vectors[row])})
            assert r.status_code == 200
            body = r.json()
            assert body["condition_index"] == int(model.labels[row])
            assert body["condition"] in ("Good Condition", "Initial Wear",
                                         "Progressed Wear")
            assert len(body["scores"]) == 3

    def test_missing_feature_400_names_field(self, client):
        fm = feature_map(client.model.vectors[0])
        del fm["skewness"]
        r = client.post("/predict", json={"features": fm})
        assert r.status_code == 400
        detail = r.json()["detail"]
        assert detail == [{"field": "skewness", "message": "missing feature"}]

    def test_non_finite_value_400(self, client):
        fm = feature_map(client.model.vectors[0])
        fm["mean"] = "NaN"  # JSON has no NaN literal; coerced server-side
        r = client.post("/predict", json={"features": fm})
        assert r.status_code == 400
        assert r.json()["detail"][0]["field"] == "mean"

    def test_unknown_feature_422(self, client):
        fm = feature_map(client.model.vectors[0])
        fm["wavelet_energy"] = 1.0
        r = client.post("/predict", json={"features": fm})
        assert r.status_code == 422
        assert r.json()["detail"][0]["field"] == "wavelet_energy"

    def test_neighbors_include_projection(self, client):
        r = client.post("/predict", json={"features": feature_map(client.model.vectors[3]),
                                          "include_neighbors": True})
        body = r.json()
        assert len(body["neighbors"]) == 4
        for nb in body["neighbors"]:
            assert 0 <= nb["index"] < 60
            assert nb["distance"] >= 0
            assert set(nb) >= {"x", "y", "label", "weight"}
        assert set(body["query_point"]) == {"x", "y"}

    def test_explanation_has_ten_coefficients(self, client):
        r = client.post("/predict", json={"features": feature_map(client.model.vectors[3]),
                                          "include_explanation": True,
                                          "explanation_seed": 4})
        body = r.json()
        exp = body["explanation"]
        assert exp["predicted_label"] == body["condition"]
        for coefs in exp["coefficients"].values():
            assert list(coefs) == list(MODEL_FEATURES)
        assert 0.0 <= exp["r_squared"] <= 1.0

    def test_explanation_deterministic_per_seed(self, client):
        payload = {"features": feature_map(client.model.vectors[10]),
                   "include_explanation": True, "explanation_seed": 9}
        a = client.post("/predict", json=payload).json()["explanation"]
        b = client.post("/predict", json=payload).json()["explanation"]
        assert a == b

    def test_repeated_predictions_identical(self, client):
        payload = {"features": feature_map(client.model.vectors[42]),
                   "include_neighbors": True}
        responses = [client.post("/predict", json=payload).content for _ in range(8)]
        assert len(set(responses)) == 1
