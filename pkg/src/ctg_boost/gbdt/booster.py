"""Multiclass softmax boosting: training loop and prediction."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..dataset import CLASS_NAMES, N_CLASSES, PREDICTORS, Dataset
from ..errors import EmptyDatasetError, NonFiniteInputError, SingleClassDatasetError
from .binning import BinMapper, fit_bins
from .config import GbdtConfig
from .objective import cross_entropy, grid_exponent, quantize, softmax, softmax_gradients
from .tree import GrowthLog, Tree, grow_tree

PRIOR_FLOOR = 1e-15


def thread_cap(requested: int | None = None) -> int:
    """Worker count: ``requested`` (or the CPU count) capped by CTG_BOOST_THREADS."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("CTG_BOOST_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


@dataclass(frozen=True, eq=False)
class BoostedModel:
    init_scores: np.ndarray
    trees: list[Tree]
    bin_mapper: BinMapper
    config: GbdtConfig
    n_classes: int = N_CLASSES
    class_names: tuple[str, ...] = CLASS_NAMES
    feature_names: tuple[str, ...] = PREDICTORS

    @property
    def n_iterations(self) -> int:
        return len(self.trees) // self.n_classes

    def class_trees(self, k: int) -> list[Tree]:
        return self.trees[k :: self.n_classes]


@dataclass
class TrainingTrace:
    """Optional side channel filled by :func:`train`."""

    loss: list[float] = field(default_factory=list)
    growth: GrowthLog = field(default_factory=GrowthLog)


def train(
    train: Dataset,
    cfg: GbdtConfig = GbdtConfig(),
    n_threads: int | None = 1,
    kernels=None,
    debug: bool = False,
    trace: TrainingTrace | None = None,
) -> BoostedModel:
    """Fit K per-class trees per iteration on softmax gradients.

    Trees of one iteration share the gradients, so they are grown
    independently (in parallel when ``n_threads > 1``) and the raw scores are
    updated afterwards; the result does not depend on the thread count.
    """
    k_mod = kernels or _kernels.default
    if train.n_rows == 0:
        raise EmptyDatasetError("cannot train on an empty dataset")
    y = train.labels
    if len(np.unique(y)) < 2:
        raise SingleClassDatasetError("training data holds a single class")
    n, K = train.n_rows, N_CLASSES

    mapper = fit_bins(train.features, cfg.max_bins)
    binned = np.ascontiguousarray(mapper.transform(train.features))
    n_bins = mapper.n_bins

    prior = np.bincount(y, minlength=K) / n
    init = np.log(np.maximum(prior, PRIOR_FLOOR))
    raw = np.tile(init, (n, 1))
    exponent = grid_exponent(n)
    growth = trace.growth if trace is not None else None
    if trace is not None:
        trace.loss.append(cross_entropy(raw, y))

    workers = min(thread_cap(n_threads), K)
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    trees: list[Tree] = []
    try:
        for _ in range(cfg.n_estimators):
            g, h = softmax_gradients(raw, y)
            g, h = quantize(g, h, exponent)

            def grow(k):
                log = GrowthLog() if growth is not None else None
                tree, leaf = grow_tree(
                    binned, np.ascontiguousarray(g[:, k]), np.ascontiguousarray(h[:, k]),
                    cfg, n_bins, mapper.thresholds, k_mod, debug, log,
                )
                return tree, leaf, log

            results = list(pool.map(grow, range(K))) if pool else [grow(k) for k in range(K)]
            for k, (tree, leaf, log) in enumerate(results):
                raw[:, k] += cfg.learning_rate * tree.value[leaf]
                trees.append(tree)
                if growth is not None:
                    growth.splits.extend(log.splits)
                    growth.histogram_checks += log.histogram_checks
            if trace is not None:
                trace.loss.append(cross_entropy(raw, y))
    finally:
        if pool:
            pool.shutdown()

    return BoostedModel(
        init_scores=init,
        trees=trees,
        bin_mapper=mapper,
        config=cfg,
        feature_names=train.feature_names,
    )


def _as_rows(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if not np.isfinite(x).all():
        raise NonFiniteInputError("input rows must be finite")
    return x, single


def predict_raw(model: BoostedModel, rows, kernels=None) -> np.ndarray:
    """init + learning_rate * (sum of routed leaf values), per class."""
    k_mod = kernels or _kernels.default
    x, single = _as_rows(rows)
    binned = np.ascontiguousarray(model.bin_mapper.transform(x))
    K = model.n_classes
    acc = np.zeros((len(x), K))
    for i, tree in enumerate(model.trees):
        acc[:, i % K] += tree.value[tree.apply_binned(binned, k_mod)]
    out = model.init_scores + model.config.learning_rate * acc
    return out[0] if single else out


def predict_proba(model: BoostedModel, rows, kernels=None) -> np.ndarray:
    return softmax(predict_raw(model, rows, kernels))


def predict(model: BoostedModel, rows, kernels=None):
    """Arg-max class index; ties resolve to the lowest index."""
    out = np.argmax(predict_proba(model, rows, kernels), axis=-1)
    return int(out) if np.ndim(out) == 0 else out
