"""Per-feature quantile binning."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CtgError


class EmptyInputError(CtgError, ValueError):
    pass


def _midpoints(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid = lo + (hi - lo) / 2.0
    # adjacent floats: keep the lower value so the upper one stays right
    return np.where(mid >= hi, lo, mid)


def feature_thresholds(values: np.ndarray, max_bins: int) -> np.ndarray:
    """Upper bin bounds for one feature.

    Up to ``max_bins`` distinct values get one bin each, split at midpoints.
    Otherwise bounds sit at the i/max_bins sample quantiles so bins hold about
    the same number of training rows; a bound inside a run of equal values
    keeps the whole run in the lower bin.
    """
    distinct = np.unique(values)
    if len(distinct) <= max_bins:
        return _midpoints(distinct[:-1], distinct[1:])
    s = np.sort(values)
    n = len(s)
    pos = np.floor(np.arange(1, max_bins) * n / max_bins + 0.5).astype(np.intp)
    pos = np.clip(pos, 1, n - 1)
    lo, hi = s[pos - 1], s[pos]
    cuts = np.where(lo < hi, _midpoints(lo, hi), lo)
    cuts = np.unique(cuts)
    return cuts[cuts < s[-1]]


@dataclass(frozen=True, eq=False)
class BinMapper:
    """Bin ``j`` of feature ``f`` holds ``thresholds[f][j-1] < x <= thresholds[f][j]``."""

    thresholds: tuple[np.ndarray, ...]

    @property
    def n_features(self) -> int:
        return len(self.thresholds)

    @property
    def n_bins(self) -> np.ndarray:
        return np.array([len(t) + 1 for t in self.thresholds], dtype=np.intp)

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {x.shape[1]}")
        out = np.empty(x.shape, dtype=np.uint8)
        for f, th in enumerate(self.thresholds):
            out[:, f] = np.searchsorted(th, x[:, f], side="left")
        return out

    def bin_upper_value(self, feature: int, bin_index: int) -> float:
        return float(self.thresholds[feature][bin_index])


def fit_bins(train_features: np.ndarray, max_bins: int = 255) -> BinMapper:
    x = np.asarray(train_features, dtype=np.float64)
    if max_bins < 2 or max_bins > 255:
        raise ValueError("max_bins must lie in [2, 255]")
    if x.ndim != 2 or len(x) == 0:
        raise EmptyInputError("fit_bins needs at least one row")
    ths = []
    for f in range(x.shape[1]):
        th = feature_thresholds(x[:, f], max_bins)
        th.setflags(write=False)
        ths.append(th)
    return BinMapper(tuple(ths))
