"""Command-line pipeline driver: synth, ingest, train, explain, sweep, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from toolwatch import dataset, dtree, evaltune, explain, features, knn, svg
from toolwatch.config import PipelineConfig, load_config
from toolwatch.dataset import ToolCondition


_ACTIVE_WRITERS: list["ArtifactWriter"] = []


class ArtifactWriter:
    """Tracks written files so a failed command leaves no partial outputs."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []
        out_dir.mkdir(parents=True, exist_ok=True)
        _ACTIVE_WRITERS.append(self)

    def write(self, name: str, content: str) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
        self.written.append(path)
        return path

    def track(self, path: Path) -> Path:
        self.written.append(path)
        return path

    def rollback(self):
        for path in self.written:
            path.unlink(missing_ok=True)


def _load_pipeline_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = Path(args.out)
    return cfg


def cmd_synth(args) -> int:
    cfg = _load_pipeline_config(args)
    writer = ArtifactWriter(cfg.out_dir)
    gen = dataset.default_generator_config(rng_seed=cfg.seed,
                                           windows_per_class=cfg.windows_per_class,
                                           window_length=cfg.window_length)
    series = dataset.synthesize(gen)
    labels = [int(s.label) for s in series]
    if cfg.label_noise > 0:
        rng = np.random.default_rng(cfg.seed + 1)
        n_noisy = int(round(cfg.label_noise * len(series)))
        for i in rng.choice(len(series), size=n_noisy, replace=False):
            labels[i] = int(rng.integers(3))
    manifest_lines = ["# path,direction,label"]
    for i, (s, lab) in enumerate(zip(series, labels)):
        name = f"signals/sig_{i:04d}.txt"
        body = "# synthetic force signal (N)\n" + "\n".join(repr(v) for v in s.samples.tolist())
        writer.write(name, body + "\n")
        manifest_lines.append(f"{name},{s.direction},{lab}")
    writer.write("manifest.csv", "\n".join(manifest_lines) + "\n")
    print(f"wrote {len(series)} signals + manifest to {cfg.out_dir}")
    return 0


def cmd_ingest(args) -> int:
    cfg = _load_pipeline_config(args)
    if args.manifest:
        cfg.manifest = Path(args.manifest)
    if cfg.manifest is None:
        raise ValueError("ingest requires a manifest (config `manifest` or --manifest)")
    writer = ArtifactWriter(cfg.out_dir)
    entries = dataset.load_manifest(cfg.manifest)
    windows = []
    total_removed = 0
    skipped = 0
    for path, direction, label in entries:
        series = dataset.load_signal(path, direction)
        series = dataset.SignalSeries(samples=series.samples, direction=direction, label=label)
        cleaned, removed = dataset.remove_outliers(series, cfg.z_threshold)
        total_removed += removed
        if len(cleaned) < cfg.window_length:
            skipped += 1  # outlier removal left less than one full window
            continue
        windows.extend(dataset.make_windows(cleaned, cfg.window_length,
                                            cfg.effective_stride, source_id=path.stem))
    if not windows:
        raise ValueError("no signal yielded a full window after outlier removal")
    print(f"loaded {len(entries)} signals ({skipped} too short after cleaning), "
          f"removed {total_removed} outlier samples, {len(windows)} windows")
    if cfg.augment_target > len(windows):
        windows = dataset.augment(windows, cfg.augment_target, rng_seed=cfg.seed)
        print(f"augmented to {len(windows)} windows")
    table = features.build_table(windows)
    path = cfg.out_dir / "features.csv"
    features.write_csv(table, path)
    writer.track(path)
    print(f"wrote {path} ({len(table)} rows)")
    return 0


def _load_features(args, cfg) -> features.FeatureTable:
    path = Path(args.features) if args.features else cfg.out_dir / "features.csv"
    if not path.exists():
        raise ValueError(f"feature table not found: {path}")
    return features.read_csv(path)


def cmd_train(args) -> int:
    cfg = _load_pipeline_config(args)
    writer = ArtifactWriter(cfg.out_dir)
    table = _load_features(args, cfg)
    if table.labels is None:
        raise ValueError("training requires a labeled feature table")

    tree = dtree.fit_tree(table)
    ranking = dtree.feature_importance(tree, table)
    writer.write("ranking.csv", ranking.to_csv())
    selected = dtree.select_top_k(ranking, min(cfg.select_k, len(table.feature_names)))
    work = table.select(selected)

    if args.split:
        train_table, test_table = evaltune.split(work, args.split, rng_seed=cfg.seed)
    else:
        train_table, test_table = work, None

    if args.mode == "tuned":
        best_hp, results = evaltune.grid_search(train_table, cfg.grid_spec(),
                                                rng_seed=cfg.seed)
        writer.write("grid_results.csv", evaltune.grid_results_csv(results))
        print(f"best hyperparameters: ({best_hp.n_neighbors}, {best_hp.metric}, "
              f"{best_hp.weighting})")
    else:
        best_hp = knn.vanilla_hyperparameters()

    model = knn.fit(train_table, best_hp)
    model_path = cfg.out_dir / "model.json"
    knn.save_model(model, model_path)
    writer.track(model_path)

    report = {"mode": args.mode, "selected_features": selected,
              "hyperparameters": {"n_neighbors": best_hp.n_neighbors,
                                  "metric": best_hp.metric,
                                  "weighting": best_hp.weighting}}
    cm, rep = evaltune.evaluate(model, train_table)
    writer.write("train_confusion.csv", cm.to_csv())
    writer.write("train_confusion.txt", evaltune.format_confusion(cm, "Train data"))
    report["train"] = _metrics_dict(rep)
    if test_table is not None:
        cm_t, rep_t = evaltune.evaluate(model, test_table)
        writer.write("test_confusion.csv", cm_t.to_csv())
        writer.write("test_confusion.txt", evaltune.format_confusion(cm_t, "Test data"))
        report["test"] = _metrics_dict(rep_t)
    writer.write("metrics.json", json.dumps(report, indent=2) + "\n")
    print(f"train accuracy {report['train']['accuracy']:.4f}, "
          f"type-2 {report['train']['type2_error_pct']:.2f}%")
    return 0


def _metrics_dict(rep: evaltune.MetricsReport) -> dict:
    return {
        "accuracy": rep.accuracy,
        "type2_error_pct": rep.type2_error_pct,
        "per_class": [
            {"condition": c.display_name, "precision": m.precision, "recall": m.recall,
             "f1": m.f1, "fp_rate": m.fp_rate, "roc_auc": m.roc_auc}
            for c, m in zip(ToolCondition, rep.per_class)
        ],
    }


def cmd_explain(args) -> int:
    cfg = _load_pipeline_config(args)
    writer = ArtifactWriter(cfg.out_dir)
    model_path = Path(args.model) if args.model else cfg.out_dir / "model.json"
    model = knn.load_model(model_path)
    table = _load_features(args, cfg).select(model.feature_names)

    if args.instance:
        values = [float(v) for v in args.instance.split(",")]
        if len(values) != len(model.feature_names):
            raise ValueError(f"instance needs {len(model.feature_names)} values "
                             f"({','.join(model.feature_names)})")
        local = explain.lime_explain(model, np.array(values), rng_seed=cfg.seed)
        writer.write("local_explanation.json", local.to_json() + "\n")
        coefs = local.coefficients[local.predicted_label.display_name]
        names = list(model.feature_names)
        chart = svg.bar_chart_svg(names, [coefs[n] for n in names],
                                  title=f"Local influence ({local.predicted_label.display_name})")
        writer.write("local_explanation.svg", chart)
        print(f"predicted: {local.predicted_label.display_name} (R^2 {local.r_squared:.3f})")
        return 0

    gi = explain.permutation_importance(model, table, repeats=10, rng_seed=cfg.seed)
    writer.write("importance.csv", gi.to_csv())
    writer.write("importance.txt", gi.to_table_text())
    proj = explain.pca_project(table)
    writer.write("pca_scatter.svg",
                 svg.scatter_svg(proj.points, proj.labels, title="Training cloud (PCA)"))
    tree = dtree.fit_tree(table)
    writer.write("tree.dot", dtree.export_tree(tree, table.feature_names))
    print(f"top feature: {gi.entries[0][0]} ({gi.entries[0][1]:.4f} ± {gi.entries[0][2]:.4f})")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_pipeline_config(args)
    writer = ArtifactWriter(cfg.out_dir)
    table = _load_features(args, cfg)
    if table.labels is None:
        raise ValueError("sweeps require labels")
    hp = knn.KnnHyperparameters(n_neighbors=args.n_neighbors, metric=args.metric,
                                weighting=args.weighting)

    points = evaltune.split_sweep(table, hp, cfg.sweep_fractions, rng_seed=cfg.seed)
    lines = ["test_fraction,train_accuracy,test_accuracy"]
    lines += [f"{p.test_fraction!r},{p.train_accuracy!r},{p.test_accuracy!r}" for p in points]
    writer.write("split_sweep.csv", "\n".join(lines) + "\n")
    writer.write("split_sweep.svg", svg.line_chart_svg(
        [p.test_fraction for p in points],
        {"train": [p.train_accuracy for p in points],
         "test": [p.test_accuracy for p in points]},
        title="Accuracy vs test split", x_label="test fraction"))

    rows = []
    for k in cfg.sweep_kfolds:
        _, mean = evaltune.kfold_cv(table, hp, k, rng_seed=cfg.seed)
        rows.append((k, mean))
    lines = ["folds,cv_mean_accuracy"] + [f"{k},{m!r}" for k, m in rows]
    writer.write("kfold_sweep.csv", "\n".join(lines) + "\n")
    writer.write("kfold_sweep.svg", svg.line_chart_svg(
        [k for k, _ in rows], {"cv_mean": [m for _, m in rows]},
        title="CV accuracy vs fold count", x_label="folds"))
    print(f"wrote sweep artifacts to {cfg.out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from toolwatch.service import create_app, resolve_port

    app = create_app(args.model)
    uvicorn.run(app, host=args.host, port=resolve_port(args.port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toolwatch",
                                     description="White-box tool condition monitoring pipeline")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synth", help="generate a synthetic labeled signal dataset")

    p = sub.add_parser("ingest", help="manifest -> cleaned windows -> feature CSV")
    p.add_argument("--manifest", help="signal manifest path")

    p = sub.add_parser("train", help="feature selection + KNN training")
    p.add_argument("--mode", choices=("vanilla", "tuned"), default="tuned")
    p.add_argument("--split", type=float, help="held-out test fraction")
    p.add_argument("--features", help="feature CSV path")

    p = sub.add_parser("explain", help="global or local model explanations")
    p.add_argument("--model", help="model file path")
    p.add_argument("--features", help="feature CSV path")
    p.add_argument("--instance", help="comma-separated feature values for a local explanation")

    p = sub.add_parser("sweep", help="split sweep and k-fold sweep")
    p.add_argument("--features", help="feature CSV path")
    p.add_argument("--n-neighbors", type=int, default=4)
    p.add_argument("--metric", default="manhattan")
    p.add_argument("--weighting", default="inverse_distance")

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "train": cmd_train,
    "explain": cmd_explain,
    "sweep": cmd_sweep,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _ACTIVE_WRITERS.clear()
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - single exit point for stage errors
        for writer in _ACTIVE_WRITERS:
            writer.rollback()
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
