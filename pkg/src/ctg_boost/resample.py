"""SMOTE oversampling up to the majority class count."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import N_CLASSES, Dataset
from .errors import EmptyDatasetError, TooFewSamplesError


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 123

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


def nearest_neighbors(x: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other rows of ``x`` for every row.

    Squared Euclidean distances are formed from explicit differences so equal
    distances compare equal; ties go to the lower row index.
    """
    n = len(x)
    out = np.empty((n, k), dtype=np.intp)
    for i in range(n):
        diff = x - x[i]
        d = np.einsum("ij,ij->i", diff, diff)
        d[i] = np.inf
        order = np.argsort(d, kind="stable")
        out[i] = order[:k]
    return out


def smote(ds: Dataset, cfg: SmoteConfig = SmoteConfig()) -> Dataset:
    """Oversample every class to the majority count.

    Classes are processed in ascending label order from a single PRNG stream;
    each synthetic row draws (source row, neighbour, interpolation factor) in
    that order. Originals come first and unchanged; synthetic rows get fresh
    row ids above the current maximum.
    """
    if ds.n_rows == 0:
        raise EmptyDatasetError("cannot oversample an empty dataset")
    counts = np.bincount(ds.labels, minlength=N_CLASSES)
    target = int(counts.max())
    rng = np.random.default_rng(cfg.seed)

    synth_x, synth_y = [], []
    for label in range(N_CLASSES):
        deficit = target - int(counts[label])
        if deficit == 0 or counts[label] == 0:
            continue
        if counts[label] < 2:
            raise TooFewSamplesError(
                f"class {label + 1} has {counts[label]} row(s); SMOTE needs at least 2", label
            )
        members = ds.features[ds.labels == label]
        k = min(cfg.k_neighbors, len(members) - 1)
        neighbors = nearest_neighbors(members, k)
        block = np.empty((deficit, members.shape[1]))
        for j in range(deficit):
            a = int(rng.integers(len(members)))
            b = int(neighbors[a, rng.integers(k)])
            u = rng.random()
            xa, xb = members[a], members[b]
            # clip guards the convex-combination bound against rounding
            block[j] = np.clip(xa + u * (xb - xa), np.minimum(xa, xb), np.maximum(xa, xb))
        synth_x.append(block)
        synth_y.append(np.full(deficit, label, dtype=np.int64))

    if not synth_x:
        return ds
    extra = np.concatenate(synth_x)
    start = int(ds.row_ids.max()) + 1
    return Dataset(
        np.vstack([ds.features, extra]),
        np.concatenate([ds.labels, *synth_y]),
        np.concatenate([ds.row_ids, np.arange(start, start + len(extra))]),
        ds.feature_names,
    )
