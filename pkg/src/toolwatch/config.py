"""Pipeline configuration: `key = value` text files with explicit seeds."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from toolwatch.evaltune import GridSpec


@dataclass
class PipelineConfig:
    manifest: Optional[Path] = None
    out_dir: Path = Path("out")
    window_length: int = 1024
    stride: int = 0  # 0 means stride = window_length (non-overlapping)
    z_threshold: float = 4.0
    augment_target: int = 0  # 0 disables augmentation
    select_k: int = 10
    seed: int = 0
    # synthetic generation
    windows_per_class: int = 100
    label_noise: float = 0.0  # fraction of synthetic windows with shuffled labels
    # grid search
    grid_n_neighbors: tuple[int, ...] = tuple(range(1, 11))
    grid_metrics: tuple[str, ...] = ("manhattan", "euclidean", "minkowski", "cosine")
    grid_weightings: tuple[str, ...] = ("uniform", "inverse_distance")
    cv_folds: int = 5
    # sweeps
    sweep_fractions: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    sweep_kfolds: tuple[int, ...] = (5, 6, 7, 8, 9, 10)

    def grid_spec(self) -> GridSpec:
        return GridSpec(n_neighbors=self.grid_n_neighbors, metrics=self.grid_metrics,
                        weightings=self.grid_weightings, cv_folds=self.cv_folds)

    @property
    def effective_stride(self) -> int:
        return self.stride if self.stride > 0 else self.window_length


_INT_TUPLES = {"grid_n_neighbors", "sweep_kfolds"}
_FLOAT_TUPLES = {"sweep_fractions"}
_STR_TUPLES = {"grid_metrics", "grid_weightings"}
_PATHS = {"manifest", "out_dir"}


def load_config(path) -> PipelineConfig:
    cfg = PipelineConfig()
    valid = {f.name for f in fields(PipelineConfig)}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {lineno}: expected `key = value`")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in valid:
            raise ValueError(f"{path}: line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, value))
    return cfg


def _coerce(key: str, value: str):
    if key in _PATHS:
        return Path(value)
    if key in _STR_TUPLES:
        return tuple(v.strip() for v in value.split(","))
    if key in _INT_TUPLES:
        return tuple(int(v) for v in value.split(","))
    if key in _FLOAT_TUPLES:
        return tuple(float(v) for v in value.split(","))
    current = getattr(PipelineConfig(), key)
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    return value
