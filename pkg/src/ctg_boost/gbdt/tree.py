"""Leaf-wise regression tree growth on binned features."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import TooFewSamplesError
from .config import GbdtConfig

LEAF_EPS = 1e-16


class HistogramMismatchError(AssertionError):
    pass


@dataclass(frozen=True, eq=False)
class Tree:
    """Flattened binary tree; node 0 is the root, ``left == -1`` marks a leaf.

    Internal nodes send a row left when its bin for ``feature`` is at most
    ``threshold_bin``, equivalently when the raw value is at most
    ``threshold_value``. Leaf ``value`` is the unscaled raw-score delta.
    """

    feature: np.ndarray
    threshold_bin: np.ndarray
    threshold_value: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    sum_grad: np.ndarray
    sum_hess: np.ndarray
    gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.left < 0

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.is_leaf)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.intp)
        for i in range(self.n_nodes):
            if self.left[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply_binned(self, binned: np.ndarray, kernels=None) -> np.ndarray:
        k = kernels or _kernels.default
        return k.route(binned, self.feature, self.threshold_bin, self.left, self.right)


@dataclass
class SplitRecord:
    """One materialized split, kept for histogram audits."""

    node: int
    feature: int
    threshold_bin: int
    gain: float
    n_left: int
    n_right: int


@dataclass
class GrowthLog:
    splits: list = field(default_factory=list)
    histogram_checks: int = 0


def leaf_value(grad_sum: float, hess_sum: float, cfg: GbdtConfig) -> float:
    g = grad_sum
    if cfg.reg_alpha:
        g = float(np.copysign(max(abs(g) - cfg.reg_alpha, 0.0), g))
    return -g / (hess_sum + cfg.reg_lambda + LEAF_EPS)


class _Leaf:
    __slots__ = ("node", "samples", "grad", "hess", "n", "depth", "hist", "split")

    def __init__(self, node, samples, grad, hess, n, depth):
        self.node = node
        self.samples = samples
        self.grad = grad
        self.hess = hess
        self.n = n
        self.depth = depth
        self.hist = None
        self.split = None


def _check_hist(kind, got, want):
    for name, a, b in zip(("grad", "hess", "count"), got, want):
        if not np.array_equal(a, b):
            raise HistogramMismatchError(f"{kind}: {name} histogram differs")


def grow_tree(
    binned: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    cfg: GbdtConfig,
    n_bins: np.ndarray,
    thresholds=None,
    kernels=None,
    debug: bool = False,
    log: GrowthLog | None = None,
):
    """Grow one tree best-first and return ``(tree, leaf_of_sample)``.

    ``g``/``h`` must already sit on the exact summation grid (see
    ``objective.quantize``). With ``debug`` every sibling histogram obtained by
    subtraction is rebuilt directly and both children are checked to add up to
    the parent, bin by bin.
    """
    k = kernels or _kernels.default
    n = len(g)
    if n < cfg.min_samples_leaf or n == 0:
        raise TooFewSamplesError(f"{n} samples, need at least {cfg.min_samples_leaf}")
    n_bins = np.asarray(n_bins, dtype=np.intp)
    n_bins_max = int(n_bins.max())
    msl = cfg.min_samples_leaf

    nodes = {"feature": [-1], "bin": [-1], "left": [-1], "right": [-1], "gain": [0.0]}
    leaves: dict[int, _Leaf] = {}

    def splittable(leaf):
        if leaf.n < 2 * msl:
            return False
        return cfg.max_depth is None or leaf.depth < cfg.max_depth

    def evaluate(leaf):
        hg, hh, hc = leaf.hist
        f, b, gain, lg, lh, ln = k.find_best_split(
            hg, hh, hc, n_bins, leaf.grad, leaf.hess, leaf.n,
            msl, cfg.min_child_weight, cfg.min_split_gain, cfg.reg_alpha, cfg.reg_lambda,
        )
        leaf.split = None if f < 0 else (f, b, gain, lg, lh, ln)

    all_samples = np.arange(n, dtype=np.intp)
    root = _Leaf(0, all_samples, float(g.sum()), float(h.sum()), n, 0)
    leaves[0] = root
    if splittable(root):
        root.hist = k.build_histogram(binned, all_samples, g, h, n_bins_max)
        evaluate(root)

    n_leaves = 1
    while n_leaves < cfg.num_leaves:
        best = None
        for leaf in leaves.values():
            if leaf.split is None:
                continue
            f, b, gain = leaf.split[:3]
            key = (-gain, f, b, leaf.node)
            if best is None or key < best[0]:
                best = (key, leaf)
        if best is None:
            break
        parent = best[1]
        f, b, gain, lg, lh, ln = parent.split
        left_idx, right_idx = k.partition(binned, parent.samples, f, b)
        left_id, right_id = len(nodes["left"]), len(nodes["left"]) + 1
        for key, val in (("feature", f), ("bin", b), ("left", left_id), ("right", right_id), ("gain", gain)):
            nodes[key][parent.node] = val
        for key in nodes:
            nodes[key].extend([0.0 if key == "gain" else -1] * 2)

        child_depth = parent.depth + 1
        left = _Leaf(left_id, left_idx, lg, lh, ln, child_depth)
        right = _Leaf(right_id, right_idx, parent.grad - lg, parent.hess - lh, parent.n - ln, child_depth)
        if len(left_idx) != left.n or len(right_idx) != right.n:
            raise HistogramMismatchError("partition sizes disagree with the split histogram")

        if splittable(left) or splittable(right) or debug:
            small, large = (left, right) if left.n <= right.n else (right, left)
            small.hist = k.build_histogram(binned, small.samples, g, h, n_bins_max)
            large.hist = tuple(p - s for p, s in zip(parent.hist, small.hist))
            if debug:
                direct = k.build_histogram(binned, large.samples, g, h, n_bins_max)
                _check_hist("sibling subtraction", large.hist, direct)
                total = tuple(a + c for a, c in zip(left.hist, right.hist))
                _check_hist("conservation", total, parent.hist)
                if log is not None:
                    log.histogram_checks += 1
            for child in (left, right):
                if splittable(child):
                    evaluate(child)
                else:
                    child.hist = None
        if log is not None:
            log.splits.append(SplitRecord(parent.node, f, b, gain, left.n, right.n))

        parent.hist = None
        parent.split = None
        del leaves[parent.node]
        leaves[left_id] = left
        leaves[right_id] = right
        n_leaves += 1

    n_nodes = len(nodes["left"])
    value = np.zeros(n_nodes)
    count = np.zeros(n_nodes, dtype=np.int64)
    sum_grad = np.zeros(n_nodes)
    sum_hess = np.zeros(n_nodes)
    leaf_of_sample = np.empty(n, dtype=np.intp)
    for leaf in leaves.values():
        value[leaf.node] = leaf_value(leaf.grad, leaf.hess, cfg)
        count[leaf.node] = leaf.n
        sum_grad[leaf.node] = leaf.grad
        sum_hess[leaf.node] = leaf.hess
        leaf_of_sample[leaf.samples] = leaf.node

    feature = np.array(nodes["feature"], dtype=np.intp)
    threshold_bin = np.array(nodes["bin"], dtype=np.intp)
    threshold_value = np.full(n_nodes, np.nan)
    if thresholds is not None:
        for i in np.flatnonzero(feature >= 0):
            threshold_value[i] = thresholds[feature[i]][threshold_bin[i]]
    tree = Tree(
        feature=feature,
        threshold_bin=threshold_bin,
        threshold_value=threshold_value,
        left=np.array(nodes["left"], dtype=np.intp),
        right=np.array(nodes["right"], dtype=np.intp),
        value=value,
        count=count,
        sum_grad=sum_grad,
        sum_hess=sum_hess,
        gain=np.array(nodes["gain"], dtype=np.float64),
    )
    return tree, leaf_of_sample
