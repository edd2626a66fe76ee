"""Confusion-matrix metrics, Cohen's kappa, multiclass MCC and one-vs-rest ROC."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrixError, LabelOutOfRangeError, LengthMismatchError

# Column order of the leaderboard table; the row uses the weighted variants.
TABLE_COLUMNS = ("Accuracy", "AUC", "Recall", "Prec.", "F1", "Kappa", "MCC")


def confusion_matrix(y_true, y_pred, n_classes: int = 3) -> np.ndarray:
    """``cm[i, j]`` counts rows of true class i predicted as j."""
    y_true = np.asarray(y_true, dtype=np.int64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.int64).ravel()
    if len(y_true) != len(y_pred):
        raise LengthMismatchError(f"{len(y_true)} labels vs {len(y_pred)} predictions")
    for a in (y_true, y_pred):
        if len(a) and (a.min() < 0 or a.max() >= n_classes):
            raise LabelOutOfRangeError(f"labels must lie in [0, {n_classes})")
    flat = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return flat.reshape(n_classes, n_classes)


def _check(cm) -> np.ndarray:
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError("confusion matrix must be square")
    if cm.sum() <= 0:
        raise EmptyMatrixError("confusion matrix is empty")
    return cm


@dataclass(frozen=True)
class Summary:
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    precision_macro: float
    recall_macro: float
    f1_macro: float
    precision_weighted: float
    recall_weighted: float
    f1_weighted: float
    flags: tuple[str, ...] = ()


def summary_metrics(cm) -> Summary:
    """Accuracy plus per-class, macro and support-weighted precision/recall/F1.

    Zero denominators give 0 and a flag. Macro averages skip classes with no
    true rows.
    """
    cm = _check(cm)
    total = int(cm.sum())
    diag = np.diag(cm).astype(np.float64)
    rows = cm.sum(axis=1)
    cols = cm.sum(axis=0)
    flags = []
    precision = np.zeros(len(cm))
    recall = np.zeros(len(cm))
    f1 = np.zeros(len(cm))
    for k in range(len(cm)):
        if cols[k] > 0:
            precision[k] = diag[k] / cols[k]
        elif rows[k] > 0:
            flags.append(f"precision_undefined:{k}")
        if rows[k] > 0:
            recall[k] = diag[k] / rows[k]
        if precision[k] + recall[k] > 0:
            f1[k] = 2 * precision[k] * recall[k] / (precision[k] + recall[k])
    present = rows > 0
    weights = rows / total
    return Summary(
        accuracy=float(diag.sum() / total),
        precision=precision,
        recall=recall,
        f1=f1,
        precision_macro=float(precision[present].mean()),
        recall_macro=float(recall[present].mean()),
        f1_macro=float(f1[present].mean()),
        precision_weighted=float(np.dot(weights, precision)),
        recall_weighted=float(np.dot(weights, recall)),
        f1_weighted=float(np.dot(weights, f1)),
        flags=tuple(flags),
    )


def _kappa_terms(cm):
    # scaled by total**2 and kept in Python ints so p_e == 1 is detected exactly
    total = int(cm.sum())
    agree = int(np.trace(cm)) * total
    chance = sum(int(r) * int(c) for r, c in zip(cm.sum(axis=1), cm.sum(axis=0)))
    return agree - chance, total * total - chance


def cohen_kappa(cm) -> float:
    """(p_o - p_e) / (1 - p_e); 0 when p_e == 1."""
    num, den = _kappa_terms(_check(cm))
    return 0.0 if den == 0 else num / den


def _mcc_terms(cm):
    s = int(cm.sum())
    c = int(np.trace(cm))
    t = [int(v) for v in cm.sum(axis=1)]
    p = [int(v) for v in cm.sum(axis=0)]
    num = c * s - sum(pk * tk for pk, tk in zip(p, t))
    den = (s * s - sum(pk * pk for pk in p)) * (s * s - sum(tk * tk for tk in t))
    return num, den


def mcc_multiclass(cm) -> float:
    """Gorodkin's K-class Matthews correlation; 0 when undefined."""
    num, den = _mcc_terms(_check(cm))
    return 0.0 if den == 0 else num / math.sqrt(den)


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    n_pos: int
    n_neg: int


def roc_curve(scores, positive) -> RocCurve:
    """Single ROC curve; tied scores move the curve in one diagonal step.

    The area is accumulated in integers and divided once, so it equals the
    Mann-Whitney statistic to the last bit.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = positive[order]
    P = int(pos.sum())
    N = len(pos) - P
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1] if len(s) else np.array([], dtype=np.intp)
    tp = np.r_[0, np.cumsum(pos)[last]].astype(np.int64)
    fp = np.r_[0, np.cumsum(~pos)[last]].astype(np.int64)
    twice_area = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    auc = twice_area / (2 * P * N) if P and N else float("nan")
    return RocCurve(
        fpr=fp / N if N else np.zeros(len(fp)),
        tpr=tp / P if P else np.zeros(len(tp)),
        thresholds=np.r_[np.inf, s[last]],
        auc=auc,
        n_pos=P,
        n_neg=N,
    )


@dataclass(frozen=True)
class RocReport:
    curves: dict
    auc_macro: float
    auc_weighted: float
    degenerate: tuple[int, ...] = ()


def roc_auc_ovr(probas, y_true, n_classes: int | None = None) -> RocReport:
    """One-vs-rest curves per class plus macro and support-weighted AUC.

    A class without positives or without negatives cannot have a curve; it is
    listed in ``degenerate`` and left out of both averages.
    """
    probas = np.atleast_2d(np.asarray(probas, dtype=np.float64))
    y_true = np.asarray(y_true, dtype=np.int64)
    if len(probas) != len(y_true):
        raise LengthMismatchError(f"{len(probas)} score rows vs {len(y_true)} labels")
    K = n_classes or probas.shape[1]
    curves, degenerate = {}, []
    for k in range(K):
        positive = y_true == k
        if positive.all() or not positive.any():
            degenerate.append(k)
            continue
        curves[k] = roc_curve(probas[:, k], positive)
    if not curves:
        return RocReport(curves, float("nan"), float("nan"), tuple(degenerate))
    aucs = np.array([c.auc for c in curves.values()])
    support = np.array([c.n_pos for c in curves.values()], dtype=np.float64)
    return RocReport(
        curves=curves,
        auc_macro=float(aucs.mean()),
        auc_weighted=float(np.dot(support, aucs) / support.sum()),
        degenerate=tuple(degenerate),
    )


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    auc_macro: float
    auc_weighted: float
    recall_macro: float
    recall_weighted: float
    precision_macro: float
    precision_weighted: float
    f1_macro: float
    f1_weighted: float
    kappa: float
    mcc: float
    n_evaluated: int
    recall_per_class: tuple[float, ...] = ()
    precision_per_class: tuple[float, ...] = ()
    f1_per_class: tuple[float, ...] = ()
    flags: tuple[str, ...] = field(default=())

    SCALAR_FIELDS = (
        "accuracy", "auc_macro", "auc_weighted", "recall_macro", "recall_weighted",
        "precision_macro", "precision_weighted", "f1_macro", "f1_weighted", "kappa", "mcc",
    )

    def table_row(self) -> dict:
        return dict(zip(TABLE_COLUMNS, (
            self.accuracy, self.auc_weighted, self.recall_weighted, self.precision_weighted,
            self.f1_weighted, self.kappa, self.mcc,
        )))

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in self.SCALAR_FIELDS}
        d["n_evaluated"] = self.n_evaluated
        d["recall_per_class"] = list(self.recall_per_class)
        d["precision_per_class"] = list(self.precision_per_class)
        d["f1_per_class"] = list(self.f1_per_class)
        d["flags"] = list(self.flags)
        return d

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        row = self.table_row()
        return ",".join(row) + "\n" + ",".join(f"{v:.4f}" for v in row.values()) + "\n"


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def evaluate(y_true, y_pred, probas=None, n_classes: int = 3) -> MetricsReport:
    """Every metric for one evaluation set; AUC fields are NaN without scores."""
    cm = confusion_matrix(y_true, y_pred, n_classes)
    s = summary_metrics(cm)
    flags = list(s.flags)
    if _kappa_terms(cm)[1] == 0:
        flags.append("kappa_undefined")
    if _mcc_terms(cm)[1] == 0:
        flags.append("mcc_undefined")
    mcc = mcc_multiclass(cm)
    auc_macro = auc_weighted = float("nan")
    if probas is not None:
        roc = roc_auc_ovr(probas, y_true, n_classes)
        auc_macro, auc_weighted = roc.auc_macro, roc.auc_weighted
        flags.extend(f"auc_degenerate_class:{k}" for k in roc.degenerate)
    return MetricsReport(
        accuracy=s.accuracy,
        auc_macro=auc_macro,
        auc_weighted=auc_weighted,
        recall_macro=s.recall_macro,
        recall_weighted=s.recall_weighted,
        precision_macro=s.precision_macro,
        precision_weighted=s.precision_weighted,
        f1_macro=s.f1_macro,
        f1_weighted=s.f1_weighted,
        kappa=cohen_kappa(cm),
        mcc=mcc,
        n_evaluated=int(cm.sum()),
        recall_per_class=tuple(float(v) for v in s.recall),
        precision_per_class=tuple(float(v) for v in s.precision),
        f1_per_class=tuple(float(v) for v in s.f1),
        flags=tuple(flags),
    )
