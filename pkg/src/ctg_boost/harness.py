"""Stratified k-fold cross-validation, model comparison and diagnostics."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import ModelSpec, make_model
from .dataset import N_CLASSES, Dataset
from .errors import CtgError, EmptyDatasetError, FoldsExceedClassCountError, LengthMismatchError, UnknownParamError
from .gbdt.booster import thread_cap
from .metrics import TABLE_COLUMNS, MetricsReport, _jsonable, confusion_matrix, evaluate
from .resample import SmoteConfig, smote

SMOTE_SCOPES = ("fold", "global", "off")
CURVE_PARAMS = ("n_estimators", "num_leaves", "learning_rate")


@dataclass(frozen=True)
class CvConfig:
    folds: int = 20
    seed: int = 123
    smote_scope: str = "fold"
    smote: SmoteConfig = field(default_factory=SmoteConfig)

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.smote_scope not in SMOTE_SCOPES:
            raise ValueError(f"smote_scope must be one of {SMOTE_SCOPES}")


def fold_assignment(labels, folds: int, seed: int = 123) -> np.ndarray:
    """Fold index of every row.

    Each class is shuffled with one seeded generator (classes in ascending
    order) and dealt round-robin; the dealing position carries over from one
    class to the next so fold sizes differ by at most one. ``folds == n``
    is leave-one-out and skips the per-class minimum.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    if n == 0:
        raise EmptyDatasetError("cannot build folds on an empty dataset")
    counts = np.bincount(labels, minlength=N_CLASSES)
    present = counts[counts > 0]
    if folds > n or (folds != n and folds > present.min()):
        raise FoldsExceedClassCountError(
            f"{folds} folds but the smallest class has {int(present.min())} rows"
        )
    rng = np.random.default_rng(seed)
    out = np.empty(n, dtype=np.intp)
    pos = 0
    for label in range(N_CLASSES):
        members = np.flatnonzero(labels == label)
        if len(members) == 0:
            continue
        members = members[rng.permutation(len(members))]
        out[members] = (pos + np.arange(len(members))) % folds
        pos = (pos + len(members)) % folds
    return out


@dataclass(frozen=True, eq=False)
class FoldResult:
    index: int
    report: MetricsReport
    train_report: MetricsReport | None
    seconds: float
    test_row_ids: np.ndarray
    y_pred: np.ndarray


def _aggregate(reports, fn) -> dict:
    return {
        name: float(fn(np.array([getattr(r, name) for r in reports])))
        for name in MetricsReport.SCALAR_FIELDS
    }


@dataclass(frozen=True, eq=False)
class CvReport:
    name: str
    folds: list
    total_seconds: float
    config: CvConfig

    @property
    def reports(self) -> list[MetricsReport]:
        return [f.report for f in self.folds]

    @property
    def fold_seconds(self) -> list[float]:
        return [f.seconds for f in self.folds]

    @property
    def mean(self) -> dict:
        return _aggregate(self.reports, np.mean)

    @property
    def std(self) -> dict:
        if len(self.folds) < 2:
            return {k: float("nan") for k in MetricsReport.SCALAR_FIELDS}
        return _aggregate(self.reports, lambda a: np.std(a, ddof=1))

    @property
    def train_mean(self) -> dict | None:
        if any(f.train_report is None for f in self.folds):
            return None
        return _aggregate([f.train_report for f in self.folds], np.mean)

    def table_row(self) -> dict:
        m = self.mean
        values = (m["accuracy"], m["auc_weighted"], m["recall_weighted"], m["precision_weighted"],
                  m["f1_weighted"], m["kappa"], m["mcc"])
        return dict(zip(TABLE_COLUMNS, values))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "folds": self.config.folds,
            "seed": self.config.seed,
            "smote_scope": self.config.smote_scope,
            "mean": self.mean,
            "std": self.std,
            "per_fold": [f.report.to_dict() for f in self.folds],
            "fold_seconds": self.fold_seconds,
            "total_seconds": self.total_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fold", *MetricsReport.SCALAR_FIELDS, "seconds"])
        for f in self.folds:
            w.writerow([f.index, *(repr(getattr(f.report, k)) for k in MetricsReport.SCALAR_FIELDS), f"{f.seconds:.4f}"])
        for label, agg in (("mean", self.mean), ("std", self.std)):
            w.writerow([label, *(repr(agg[k]) for k in MetricsReport.SCALAR_FIELDS), ""])
        return buf.getvalue()


def _run_fold(i, data, assign, spec, cfg, score_train, gbdt_threads):
    start = time.perf_counter()
    test = data.take(np.flatnonzero(assign == i))
    train = data.take(np.flatnonzero(assign != i))
    if cfg.smote_scope == "fold":
        train = smote(train, cfg.smote)
    try:
        model = make_model(spec, gbdt_threads).fit(train)
        proba = model.predict_proba(test.features)
        y_pred = model.predict(test.features)
        report = evaluate(test.labels, y_pred, proba)
        train_report = None
        if score_train:
            train_report = evaluate(train.labels, model.predict(train.features), model.predict_proba(train.features))
    except CtgError as exc:
        # keep the type (it decides the exit code), prefix the fold for context
        exc.args = (f"fold {i}: {exc}",)
        raise
    return FoldResult(i, report, train_report, time.perf_counter() - start, test.row_ids, y_pred)


def kfold_cv(
    ds: Dataset,
    spec: ModelSpec = ModelSpec(),
    cfg: CvConfig = CvConfig(),
    n_threads: int | None = 1,
    score_train: bool = False,
) -> CvReport:
    """Cross-validate ``spec`` and return per-fold and aggregate metrics.

    ``smote_scope="global"`` oversamples the whole table before folding, so the
    evaluation folds hold synthetic rows too; ``"fold"`` oversamples only the
    training part of each split. Folds run on up to ``n_threads`` workers and
    are merged in fold order.
    """
    if ds.n_rows == 0:
        raise EmptyDatasetError("cannot cross-validate an empty dataset")
    data = smote(ds, cfg.smote) if cfg.smote_scope == "global" else ds
    assign = fold_assignment(data.labels, cfg.folds, cfg.seed)
    workers = min(thread_cap(n_threads), cfg.folds)
    # one level of parallelism at a time; boosting threads only when folds run serially
    gbdt_threads = 1 if workers > 1 else n_threads

    start = time.perf_counter()
    args = (data, assign, spec, cfg, score_train, gbdt_threads)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda i: _run_fold(i, *args), range(cfg.folds)))
    else:
        results = [_run_fold(i, *args) for i in range(cfg.folds)]
    total = time.perf_counter() - start

    if cfg.smote_scope != "global":
        original = set(ds.row_ids.tolist())
        for r in results:
            if not original.issuperset(r.test_row_ids.tolist()):
                raise AssertionError(f"fold {r.index} evaluates synthetic rows")
    return CvReport(spec.label, results, total, cfg)


@dataclass(frozen=True, eq=False)
class Leaderboard:
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Model", *TABLE_COLUMNS, "TT (Sec)"])
        for r in self.rows:
            w.writerow([r.name, *(f"{v:.4f}" for v in r.table_row().values()), f"{r.total_seconds:.2f}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"rows": [{"name": r.name, "mean": r.mean, "std": r.std, "tt_seconds": r.total_seconds}
                         for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rows]


def compare_models(ds: Dataset, specs, cfg: CvConfig = CvConfig(), n_threads: int | None = 1) -> Leaderboard:
    """Cross-validate every spec on identical folds; best accuracy first, ties by name."""
    specs = list(specs)
    if not specs:
        raise ValueError("compare_models needs at least one model spec")
    reports = [kfold_cv(ds, s, cfg, n_threads) for s in specs]
    reports.sort(key=lambda r: (-r.mean["accuracy"], r.name))
    return Leaderboard(reports)


def class_prediction_error(y_pred, y_true, n_classes: int = N_CLASSES) -> np.ndarray:
    """Bar ``i`` stacks the predicted classes of the rows whose true class is ``i``."""
    if len(y_pred) != len(y_true):
        raise LengthMismatchError(f"{len(y_pred)} predictions vs {len(y_true)} labels")
    return confusion_matrix(y_true, y_pred, n_classes)


@dataclass(frozen=True, eq=False)
class ValidationCurve:
    param: str
    values: tuple
    train_scores: np.ndarray
    cv_scores: np.ndarray
    reports: list

    def to_csv(self) -> str:
        lines = [f"{self.param},train_score,cv_score"]
        lines += [f"{v!r},{t!r},{c!r}" for v, t, c in zip(self.values, self.train_scores.tolist(), self.cv_scores.tolist())]
        return "\n".join(lines) + "\n"

    def series_csv(self, which: str) -> str:
        scores = self.train_scores if which == "train" else self.cv_scores
        return f"{self.param},{which}_score\n" + "".join(f"{v!r},{s!r}\n" for v, s in zip(self.values, scores.tolist()))


def validation_curve(
    ds: Dataset,
    spec: ModelSpec,
    param: str,
    values,
    cfg: CvConfig = CvConfig(),
    n_threads: int | None = 1,
    metric: str = "accuracy",
) -> ValidationCurve:
    """Mean train and CV ``metric`` for each value of one boosting parameter."""
    if param not in CURVE_PARAMS:
        raise UnknownParamError(f"unknown curve parameter {param!r}; expected one of {CURVE_PARAMS}")
    if spec.kind != "gbdt":
        raise ValueError("validation curves are defined for the gbdt spec")
    values = tuple(values)
    reports, train, cv = [], [], []
    for v in values:
        v = float(v) if param == "learning_rate" else int(v)
        s = replace(spec, gbdt=spec.gbdt.replace(**{param: v}))
        rep = kfold_cv(ds, s, cfg, n_threads, score_train=True)
        reports.append(rep)
        train.append(rep.train_mean[metric])
        cv.append(rep.mean[metric])
    return ValidationCurve(param, values, np.array(train), np.array(cv), reports)
