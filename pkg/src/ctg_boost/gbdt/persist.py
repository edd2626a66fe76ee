"""JSON model documents, version ``ctg-boost-model/1``."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import CorruptModelError, VersionMismatchError
from .binning import BinMapper
from .booster import BoostedModel
from .config import GbdtConfig
from .tree import Tree

MODEL_VERSION = "ctg-boost-model/1"
SCORE_NOTE = "raw_score[k] = init_scores[k] + learning_rate * sum(leaf value of each class-k tree); leaf values are stored unscaled"


def _floats(a) -> list:
    # repr() of a float is the shortest string that parses back to the same double
    return [None if np.isnan(v) else float(v) for v in np.asarray(a, dtype=np.float64)]


def _ints(a) -> list:
    return [int(v) for v in np.asarray(a)]


def model_to_dict(model: BoostedModel) -> dict:
    trees = []
    for i, t in enumerate(model.trees):
        trees.append(
            {
                "iteration": i // model.n_classes,
                "class": i % model.n_classes,
                "feature": _ints(t.feature),
                "threshold_bin": _ints(t.threshold_bin),
                "threshold_value": _floats(t.threshold_value),
                "left": _ints(t.left),
                "right": _ints(t.right),
                "value": _floats(t.value),
                "count": _ints(t.count),
                "sum_grad": _floats(t.sum_grad),
                "sum_hess": _floats(t.sum_hess),
                "gain": _floats(t.gain),
            }
        )
    return {
        "version": MODEL_VERSION,
        "objective": "multiclass_softmax",
        "score_note": SCORE_NOTE,
        "config": model.config.to_dict(),
        "schema": {
            "features": list(model.feature_names),
            "class_names": list(model.class_names),
            "class_labels": list(range(1, model.n_classes + 1)),
        },
        "n_classes": model.n_classes,
        "init_scores": _floats(model.init_scores),
        "bin_thresholds": [_floats(th) for th in model.bin_mapper.thresholds],
        "trees": trees,
    }


def dumps_model(model: BoostedModel) -> str:
    return json.dumps(model_to_dict(model), indent=1, allow_nan=False) + "\n"


def save_model(model: BoostedModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def _array(values, dtype, name):
    if not isinstance(values, list):
        raise CorruptModelError(f"{name} must be a list")
    if dtype is float:
        return np.array([np.nan if v is None else float(v) for v in values], dtype=np.float64)
    return np.array([int(v) for v in values], dtype=np.intp if dtype is int else dtype)


def _tree_from_dict(d: dict, n_features: int, n_bins: np.ndarray) -> Tree:
    arrays = {}
    for name in ("feature", "threshold_bin", "left", "right"):
        arrays[name] = _array(d[name], int, name)
    arrays["count"] = _array(d["count"], np.int64, "count")
    for name in ("threshold_value", "value", "sum_grad", "sum_hess", "gain"):
        arrays[name] = _array(d[name], float, name)
    n = len(arrays["left"])
    if n == 0 or any(len(a) != n for a in arrays.values()):
        raise CorruptModelError("tree arrays have inconsistent lengths")
    left, right, feat = arrays["left"], arrays["right"], arrays["feature"]
    internal = left >= 0
    if ((right >= 0) != internal).any():
        raise CorruptModelError("node with a single child")
    if internal.sum() != n - internal.sum() - 1:
        raise CorruptModelError("internal/leaf node counts do not match a binary tree")
    kids = np.concatenate([left[internal], right[internal]])
    if len(kids) and (kids.min() < 1 or kids.max() >= n or len(np.unique(kids)) != len(kids)):
        raise CorruptModelError("child indices out of range or shared")
    if internal.any():
        f = feat[internal]
        if f.min() < 0 or f.max() >= n_features:
            raise CorruptModelError("split feature out of range")
        if (arrays["threshold_bin"][internal] >= n_bins[f] - 1).any() or (arrays["threshold_bin"][internal] < 0).any():
            raise CorruptModelError("split bin out of range")
    if not np.isfinite(arrays["value"][~internal]).all():
        raise CorruptModelError("non-finite leaf value")
    return Tree(**arrays)


def model_from_dict(d: dict) -> BoostedModel:
    if not isinstance(d, dict):
        raise CorruptModelError("model document must be a JSON object")
    version = d.get("version")
    if version != MODEL_VERSION:
        raise VersionMismatchError(f"model version {version!r}, expected {MODEL_VERSION!r}")
    try:
        cfg = GbdtConfig.from_dict(d["config"])
        n_classes = int(d["n_classes"])
        schema = d["schema"]
        features = tuple(schema["features"])
        class_names = tuple(schema["class_names"])
        init = _array(d["init_scores"], float, "init_scores")
        thresholds = []
        for th in d["bin_thresholds"]:
            a = _array(th, float, "bin_thresholds")
            if not np.isfinite(a).all() or (len(a) > 1 and not (np.diff(a) > 0).all()):
                raise CorruptModelError("bin thresholds must be finite and strictly increasing")
            a.setflags(write=False)
            thresholds.append(a)
        mapper = BinMapper(tuple(thresholds))
        if len(features) != mapper.n_features or len(init) != n_classes or len(class_names) != n_classes:
            raise CorruptModelError("schema, thresholds and init scores disagree")
        trees = [_tree_from_dict(t, mapper.n_features, mapper.n_bins) for t in d["trees"]]
    except CorruptModelError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CorruptModelError(f"malformed model document: {exc}") from exc
    if len(trees) != cfg.n_estimators * n_classes:
        raise CorruptModelError(f"expected {cfg.n_estimators * n_classes} trees, found {len(trees)}")
    return BoostedModel(
        init_scores=init,
        trees=trees,
        bin_mapper=mapper,
        config=cfg,
        n_classes=n_classes,
        class_names=class_names,
        feature_names=features,
    )


def loads_model(text: str) -> BoostedModel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"not a JSON document: {exc}") from exc
    return model_from_dict(d)


def load_model(path) -> BoostedModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptModelError(str(exc)) from exc
    return loads_model(text)
