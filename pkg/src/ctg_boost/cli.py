"""``ctg-boost`` command line: validate, split, train, evaluate, cv, compare, curve, pipeline.

Exit codes: 0 success, 1 usage, 2 data/schema problems, 3 training or model-file
problems. Diagnostics are a single line on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .baselines import DISPLAY_NAMES, MODEL_KINDS, ModelSpec
from .dataset import CLASS_NAMES, class_counts, load_csv, stratified_split, write_csv
from .errors import CtgError, DataError, TrainingError
from .gbdt import GbdtConfig, load_model, predict_proba, save_model, train
from .harness import CURVE_PARAMS, SMOTE_SCOPES, CvConfig, class_prediction_error, compare_models, kfold_cv, validation_curve
from .metrics import _jsonable, confusion_matrix, evaluate, roc_auc_ovr
from .plots import class_error_svg, roc_svg, validation_curve_svg
from .resample import SmoteConfig, smote

__all__ = ["RunConfig", "build_parser", "load_model", "main", "save_model"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAINING = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    data: Path | None = None
    out: Path | None = None
    seed: int = 123
    test_fraction: float = 0.2
    smote_scope: str = "fold"
    folds: int = 20
    gbdt: GbdtConfig = field(default_factory=GbdtConfig)
    models: tuple[str, ...] = ("gbdt", "cart", "knn", "dummy")
    param: str = "n_estimators"
    values: tuple = (1, 5, 10, 25, 50, 100)
    fmt: str = "csv"
    model_path: Path | None = None

    @classmethod
    def from_args(cls, a: argparse.Namespace) -> RunConfig:
        overrides = {
            k: getattr(a, k)
            for k in ("learning_rate", "num_leaves", "n_estimators", "min_samples_leaf")
            if getattr(a, k, None) is not None
        }
        try:
            gbdt = GbdtConfig(seed=a.seed, **overrides)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        models = tuple(m.strip() for m in a.models.split(",") if m.strip())
        for m in models:
            if m not in MODEL_KINDS:
                raise UsageError(f"unknown model {m!r}; choose from {','.join(MODEL_KINDS)}")
        try:
            values = tuple(float(v) if a.param == "learning_rate" else int(v) for v in a.values.split(","))
        except ValueError:
            raise UsageError(f"cannot parse --values {a.values!r}") from None
        if not 0.0 <= a.test_fraction <= 1.0:
            raise UsageError("--test-fraction must lie in [0, 1]")
        return cls(
            data=Path(a.data) if a.data else None,
            out=Path(a.out) if a.out else None,
            seed=a.seed,
            test_fraction=a.test_fraction,
            smote_scope=a.smote_scope,
            folds=a.folds,
            gbdt=gbdt,
            models=models,
            param=a.param,
            values=values,
            fmt=a.format,
            model_path=Path(a.model) if a.model else None,
        )

    @property
    def smote_cfg(self) -> SmoteConfig:
        return SmoteConfig(seed=self.seed)

    @property
    def cv_cfg(self) -> CvConfig:
        try:
            return CvConfig(self.folds, self.seed, self.smote_scope, self.smote_cfg)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def spec(self, kind: str) -> ModelSpec:
        return ModelSpec(kind, gbdt=self.gbdt, seed=self.seed)

    def echo(self) -> dict:
        return {
            "data": self.data.name if self.data else None,
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "smote_scope": self.smote_scope,
            "gbdt": self.gbdt.to_dict(),
        }


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="input CSV (header row + fetal_health column)")
    common.add_argument("--out", help="output directory, created if absent")
    common.add_argument("--seed", type=int, default=123)
    common.add_argument("--test-fraction", type=float, default=0.2)
    common.add_argument("--smote-scope", choices=SMOTE_SCOPES, default="fold",
                        help="cv: where SMOTE runs; train/pipeline: 'off' disables it")
    common.add_argument("--folds", type=int, default=20)
    common.add_argument("--learning-rate", type=float)
    common.add_argument("--num-leaves", type=int)
    common.add_argument("--n-estimators", type=int)
    common.add_argument("--min-samples-leaf", type=int)
    common.add_argument("--models", default="gbdt,cart,knn,dummy", help="comma list for compare/cv")
    common.add_argument("--param", choices=CURVE_PARAMS, default="n_estimators")
    common.add_argument("--values", default="1,5,10,25,50,100")
    common.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    common.add_argument("--model", help="model file for evaluate")

    p = _Parser(prog="ctg-boost", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "validate": "check a CSV against the schema and print class counts",
        "split": "write a stratified train/test split",
        "train": "train the booster (SMOTE on the training data) and save the model",
        "evaluate": "score a saved model on a CSV",
        "cv": "stratified k-fold cross-validation of the first --models entry",
        "compare": "cross-validated leaderboard of --models",
        "curve": "validation curve over --param/--values",
        "pipeline": "split, SMOTE, train, evaluate and write every report",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return p


def _require_data(cfg: RunConfig):
    if cfg.data is None:
        raise UsageError("--data is required")
    if not cfg.data.is_file():
        raise UsageError(f"data file not found: {cfg.data}")
    return load_csv(cfg.data)


def _out_dir(cfg: RunConfig, default: str | None = None) -> Path | None:
    out = cfg.out or (Path(default) if default else None)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def _table(rows: list[tuple[str, dict, float | None]]) -> str:
    cols = list(next(iter(rows))[1])
    width = max(len(r[0]) for r in rows) + 2
    head = "Model".ljust(width) + "".join(c.rjust(9) for c in cols)
    if rows[0][2] is not None:
        head += "TT (Sec)".rjust(10)
    lines = [head]
    for name, vals, tt in rows:
        line = name.ljust(width) + "".join(f"{v:9.4f}" for v in vals.values())
        if tt is not None:
            line += f"{tt:10.2f}"
        lines.append(line)
    return "\n".join(lines)


def write_evaluation(out: Path, y_true, y_pred, proba) -> dict:
    """Confusion, ROC and class-error files for one evaluation set; returns metrics."""
    report = evaluate(y_true, y_pred, proba)
    cm = confusion_matrix(y_true, y_pred)
    header = "true\\pred," + ",".join(CLASS_NAMES)
    _write(out / "confusion.csv", header + "\n" + "".join(
        f"{CLASS_NAMES[i]}," + ",".join(str(int(v)) for v in cm[i]) + "\n" for i in range(len(cm))))
    roc = roc_auc_ovr(proba, y_true, len(CLASS_NAMES))
    for k, c in roc.curves.items():
        lines = ["fpr,tpr,threshold"] + [
            f"{f!r},{t!r},{th!r}" for f, t, th in zip(c.fpr.tolist(), c.tpr.tolist(), c.thresholds.tolist())
        ]
        _write(out / f"roc_{CLASS_NAMES[k].lower()}.csv", "\n".join(lines) + "\n")
    _write(out / "roc.svg", roc_svg(roc.curves, CLASS_NAMES))
    bars = class_prediction_error(y_pred, y_true)
    _write(out / "class_error.csv", "true_class," + ",".join(f"pred_{n}" for n in CLASS_NAMES) + "\n" + "".join(
        f"{CLASS_NAMES[i]}," + ",".join(str(int(v)) for v in bars[i]) + "\n" for i in range(len(bars))))
    _write(out / "class_error.svg", class_error_svg(bars, CLASS_NAMES))
    return report


def cmd_validate(cfg: RunConfig) -> int:
    ds = _require_data(cfg)
    counts = class_counts(ds)
    print(f"{cfg.data}: {ds.n_rows} rows, {len(ds.feature_names)} predictors")
    for name, n in counts.items():
        print(f"  {name}: {n}")
    return EXIT_OK


def cmd_split(cfg: RunConfig) -> int:
    ds = _require_data(cfg)
    out = _out_dir(cfg, ".")
    pair = stratified_split(ds, cfg.test_fraction, cfg.seed)
    write_csv(pair.train, out / "train.csv")
    write_csv(pair.test, out / "test.csv")
    print(f"train {pair.train.n_rows} rows -> {out / 'train.csv'}")
    print(f"test {pair.test.n_rows} rows -> {out / 'test.csv'}")
    return EXIT_OK


def _fit(cfg: RunConfig, train_ds):
    if cfg.smote_scope != "off":
        train_ds = smote(train_ds, cfg.smote_cfg)
    return train(train_ds, cfg.gbdt, n_threads=None)


def cmd_train(cfg: RunConfig) -> int:
    ds = _require_data(cfg)
    out = _out_dir(cfg, ".")
    model = _fit(cfg, ds)
    save_model(model, out / "model.json")
    print(f"model with {len(model.trees)} trees -> {out / 'model.json'}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    if cfg.model_path is None:
        raise UsageError("--model is required")
    ds = _require_data(cfg)
    model = load_model(cfg.model_path)
    out = _out_dir(cfg, ".")
    proba = predict_proba(model, ds.features)
    report = write_evaluation(out, ds.labels, np.argmax(proba, axis=1), proba)
    _write(out / "metrics.json", report.to_json())
    print(_table([("Gradient Boosting", report.table_row(), None)]))
    return EXIT_OK


def cmd_cv(cfg: RunConfig) -> int:
    ds = _require_data(cfg)
    spec = cfg.spec(cfg.models[0])
    rep = kfold_cv(ds, spec, cfg.cv_cfg, n_threads=None)
    out = _out_dir(cfg)
    if out is not None:
        text = rep.to_json() if cfg.fmt == "json" else rep.to_csv()
        _write(out / f"cv_{spec.kind}.{'json' if cfg.fmt == 'json' else 'csv'}", text)
    print(_table([(DISPLAY_NAMES[spec.kind], rep.table_row(), rep.total_seconds)]))
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    ds = _require_data(cfg)
    board = compare_models(ds, [cfg.spec(k) for k in cfg.models], cfg.cv_cfg, n_threads=None)
    out = _out_dir(cfg)
    if out is not None:
        if cfg.fmt == "json":
            _write(out / "leaderboard.json", board.to_json())
        else:
            _write(out / "leaderboard.csv", board.to_csv())
    print(_table([(DISPLAY_NAMES[r.name], r.table_row(), r.total_seconds) for r in board.rows]))
    return EXIT_OK


def cmd_curve(cfg: RunConfig) -> int:
    ds = _require_data(cfg)
    curve = validation_curve(ds, cfg.spec("gbdt"), cfg.param, cfg.values, cfg.cv_cfg, n_threads=None)
    out = _out_dir(cfg)
    if out is not None:
        if cfg.fmt == "svg":
            _write(out / "validation_curve.svg",
                   validation_curve_svg(cfg.param, curve.values, curve.train_scores, curve.cv_scores))
        elif cfg.fmt == "json":
            _write(out / "validation_curve.json", json.dumps({
                "param": cfg.param, "values": list(curve.values),
                "train_score": curve.train_scores.tolist(), "cv_score": curve.cv_scores.tolist(),
            }, indent=2) + "\n")
        else:
            _write(out / "validation_curve_train.csv", curve.series_csv("train"))
            _write(out / "validation_curve_cv.csv", curve.series_csv("cv"))
    sys.stdout.write(curve.to_csv())
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig) -> int:
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    ds = _require_data(cfg)
    out = _out_dir(cfg, "ctg_boost_out")
    pair = stratified_split(ds, cfg.test_fraction, cfg.seed)
    model = _fit(cfg, pair.train)
    save_model(model, out / "model.json")
    if pair.test.n_rows == 0:
        raise UsageError("--test-fraction leaves no rows to evaluate")
    proba = predict_proba(model, pair.test.features)
    y_pred = np.argmax(proba, axis=1)
    report = write_evaluation(out, pair.test.labels, y_pred, proba)
    doc = {
        "config": cfg.echo(),
        "n_train": pair.train.n_rows,
        "n_test": pair.test.n_rows,
        "metrics": report.to_dict(),
    }
    _write(out / "metrics.json", json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    _write(out / "run_log.json", json.dumps({
        "started_utc": started.isoformat(),
        "seconds": round(time.perf_counter() - t0, 3),
        "backend": _kernels.BACKEND,
        "threads_cap": os.environ.get("CTG_BOOST_THREADS"),
        "python": platform.python_version(),
        "version": __version__,
    }, indent=2) + "\n")
    print(_table([("Gradient Boosting", report.table_row(), None)]))
    print(f"artifacts -> {out}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "split": cmd_split,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "cv": cmd_cv,
    "compare": cmd_compare,
    "curve": cmd_curve,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        sub.print_usage(sys.stderr)
        print(f"ctg-boost {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"ctg-boost: training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except (DataError, CtgError) as exc:
        print(f"ctg-boost: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
