"""Read-only HTTP inference service over a persisted KNN model.

Endpoints: GET /health, GET /model/importance, GET /model/projection,
POST /predict.  Port comes from --port or the TOOLWATCH_PORT env var.
"""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from toolwatch import explain, knn
from toolwatch.dataset import ToolCondition
from toolwatch.features import FEATURE_NAMES, FeatureTable
from toolwatch.knn import KnnModel

DEFAULT_PORT = 8077
DEFAULT_EXPLANATION_SEED = 0
IMPORTANCE_REPEATS = 10
IMPORTANCE_SEED = 0


def resolve_port(cli_port: Optional[int] = None) -> int:
    if cli_port is not None:
        return cli_port
    env = os.environ.get("TOOLWATCH_PORT")
    return int(env) if env else DEFAULT_PORT


class PredictRequest(BaseModel):
    features: dict[str, float]
    include_neighbors: bool = False
    include_explanation: bool = False
    explanation_seed: int = DEFAULT_EXPLANATION_SEED


def create_app(model_path, static_dir: Optional[Path] = None) -> FastAPI:
    """Build the service app; the model and global explanation load once."""
    model = knn.load_model(model_path)
    training_table = FeatureTable(feature_names=model.feature_names,
                                  values=model.vectors, labels=model.labels)
    importance = explain.permutation_importance(model, training_table,
                                                repeats=IMPORTANCE_REPEATS,
                                                rng_seed=IMPORTANCE_SEED)
    projection = explain.pca_project(training_table)
    projected_training = projection.transform(model.vectors)

    app = FastAPI(title="toolwatch inference service", version="0.1.0")

    metadata = {
        "feature_names": list(model.feature_names),
        "training_size": model.n_training,
        "hyperparameters": {
            "n_neighbors": model.hyperparameters.n_neighbors,
            "metric": model.hyperparameters.metric,
            "weighting": model.hyperparameters.weighting,
        },
        "class_names": [c.display_name for c in ToolCondition],
    }

    importance_payload = {
        "entries": [{"feature": n, "mean": m, "std": s} for n, m, s in importance.entries]
    }
    projection_payload = {
        "explained_variance": projection.explained_variance.tolist(),
        "points": [
            {"x": float(p[0]), "y": float(p[1]), "label": int(lab)}
            for p, lab in zip(projected_training, model.labels)
        ],
    }

    @app.get("/health")
    def health():
        return {"status": "ok", "model": metadata}

    @app.get("/model/importance")
    def model_importance():
        return importance_payload

    @app.get("/model/projection")
    def model_projection():
        return projection_payload

    @app.post("/predict")
    def predict(request: PredictRequest):
        vector = _vector_from_request(request.features, model)
        prediction = knn.predict(model, vector)
        response = {
            "condition": prediction.label.display_name,
            "condition_index": int(prediction.label),
            "scores": prediction.scores.tolist(),
            "model": metadata,
        }
        if request.include_neighbors:
            response["neighbors"] = [
                {
                    "index": nb.index,
                    "distance": nb.distance,
                    "weight": nb.weight,
                    "label": nb.label.display_name,
                    "x": float(projected_training[nb.index][0]),
                    "y": float(projected_training[nb.index][1]),
                }
                for nb in prediction.neighbors
            ]
            qp = projection.transform(vector[None, :])[0]
            response["query_point"] = {"x": float(qp[0]), "y": float(qp[1])}
        if request.include_explanation:
            local = explain.lime_explain(model, vector,
                                         rng_seed=request.explanation_seed)
            response["explanation"] = {
                "predicted_label": local.predicted_label.display_name,
                "coefficients": local.coefficients,
                "r_squared": local.r_squared,
                "kernel_width": local.kernel_width,
            }
        return response

    if static_dir is None:
        static_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _vector_from_request(feature_map: dict[str, float], model: KnnModel) -> np.ndarray:
    """Validate a feature map: the model's features, or the full 12-feature set."""
    names = set(model.feature_names)
    unknown = [k for k in feature_map if k not in names and k not in FEATURE_NAMES]
    if unknown:
        raise HTTPException(status_code=422,
                            detail=[{"field": k, "message": "unknown feature"} for k in unknown])
    problems = []
    for name in model.feature_names:
        if name not in feature_map:
            problems.append({"field": name, "message": "missing feature"})
        elif not math.isfinite(feature_map[name]):
            problems.append({"field": name, "message": "value must be finite"})
    if problems:
        raise HTTPException(status_code=400, detail=problems)
    return np.array([float(feature_map[name]) for name in model.feature_names])
