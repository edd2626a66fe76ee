"""Cardiotocography table ingestion and stratified splitting."""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyDatasetError,
    InvalidLabelError,
    MissingColumnError,
    NonFiniteValueError,
    UnparsableCellError,
)

CLASS_NAMES = ("Normal", "Suspect", "Pathological")
N_CLASSES = len(CLASS_NAMES)

PREDICTORS = (
    "baseline_value",
    "accelerations",
    "fetal_movement",
    "uterine_contractions",
    "light_decelerations",
    "severe_decelerations",
    "prolongued_decelerations",
    "abnormal_short_term_variability",
    "mean_value_of_short_term_variability",
    "percentage_of_time_with_abnormal_long_term_variability",
    "mean_value_of_long_term_variability",
    "histogram_width",
    "histogram_min",
    "histogram_max",
    "histogram_number_of_peaks",
    "histogram_number_of_zeroes",
    "histogram_mode",
    "histogram_mean",
    "histogram_median",
    "histogram_variance",
    "histogram_tendency",
)
TARGET = "fetal_health"

# header spellings seen in circulated copies of the table
_ALIASES = {
    "prolonged_decelerations": "prolongued_decelerations",
    "prolongued_deceleration": "prolongued_decelerations",
    "prolonged_deceleration": "prolongued_decelerations",
}


@dataclass(frozen=True)
class FeatureSchema:
    predictors: tuple[str, ...] = PREDICTORS
    target: str = TARGET

    def __post_init__(self):
        if len(set(self.predictors)) != len(self.predictors):
            raise ValueError("predictor names must be distinct")
        if self.target in self.predictors:
            raise ValueError("target name collides with a predictor")


DEFAULT_SCHEMA = FeatureSchema()


def normalize_name(name: str) -> str:
    name = re.sub(r"\s+", "_", name.strip().lower())
    return _ALIASES.get(name, name)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, 0-based labels and stable row ids.

    Arrays are made read-only on construction so instances can be shared.
    """

    features: np.ndarray
    labels: np.ndarray
    row_ids: np.ndarray
    feature_names: tuple[str, ...] = PREDICTORS

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64, order="C")
        if x.ndim != 2:
            x = x.reshape(-1, len(self.feature_names))
        y = np.array(self.labels, dtype=np.int64)
        ids = np.array(self.row_ids, dtype=np.int64)
        if not (len(x) == len(y) == len(ids)):
            raise ValueError("features, labels and row_ids differ in length")
        if x.shape[1] != len(self.feature_names):
            raise ValueError(f"expected {len(self.feature_names)} feature columns, got {x.shape[1]}")
        if not np.isfinite(x).all():
            raise ValueError("features must be finite")
        if len(y) and (y.min() < 0 or y.max() >= N_CLASSES):
            raise ValueError("labels must lie in {0, 1, 2}")
        if len(np.unique(ids)) != len(ids):
            raise ValueError("row_ids must be unique")
        object.__setattr__(self, "features", _readonly(x))
        object.__setattr__(self, "labels", _readonly(y))
        object.__setattr__(self, "row_ids", _readonly(ids))

    @property
    def n_rows(self) -> int:
        return len(self.labels)

    def __len__(self):
        return self.n_rows

    def take(self, positions) -> Dataset:
        positions = np.asarray(positions, dtype=np.intp)
        return Dataset(
            self.features[positions],
            self.labels[positions],
            self.row_ids[positions],
            self.feature_names,
        )

    def equals(self, other: Dataset) -> bool:
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.row_ids, other.row_ids)
        )


def empty_dataset(feature_names=PREDICTORS) -> Dataset:
    return Dataset(
        np.empty((0, len(feature_names))),
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.int64),
        tuple(feature_names),
    )


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    test_fraction: float


def _parse_real(text: str, row: int, col: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UnparsableCellError(row, col, text) from None
    if not math.isfinite(value):
        raise NonFiniteValueError(row, col)
    return value


def load_csv(path, schema: FeatureSchema = DEFAULT_SCHEMA) -> Dataset:
    """Read the CTG table.

    Headers are matched after normalization (case, surrounding whitespace,
    inner whitespace to underscores), so column order does not matter. Row
    numbers in errors are 1-based data rows, i.e. excluding the header.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(schema.predictors[0]) from None
        index = {}
        for i, name in enumerate(header):
            index.setdefault(normalize_name(name), i)
        wanted = [normalize_name(n) for n in (*schema.predictors, schema.target)]
        for name in wanted:
            if name not in index:
                raise MissingColumnError(name)
        cols = [index[n] for n in wanted]

        features, labels = [], []
        for rownum, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            values = [
                _parse_real(record[c].strip() if c < len(record) else "", rownum, wanted[j])
                for j, c in enumerate(cols)
            ]
            raw_label = values.pop()
            if raw_label not in (1.0, 2.0, 3.0):
                raise InvalidLabelError(rownum, record[cols[-1]].strip())
            features.append(values)
            labels.append(int(raw_label) - 1)

    n = len(labels)
    x = np.array(features, dtype=np.float64).reshape(n, len(schema.predictors))
    return Dataset(x, np.array(labels, dtype=np.int64), np.arange(n), tuple(schema.predictors))


def write_csv(ds: Dataset, path, schema: FeatureSchema = DEFAULT_SCHEMA) -> None:
    """Write ``ds`` in the public layout; ``repr`` keeps every real exact."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*schema.predictors, schema.target])
        for row, label in zip(ds.features.tolist(), ds.labels.tolist()):
            w.writerow([repr(v) for v in row] + [repr(float(label + 1))])


def class_counts(ds: Dataset) -> dict[str, int]:
    counts = np.bincount(ds.labels, minlength=N_CLASSES)
    return {name: int(c) for name, c in zip(CLASS_NAMES, counts)}


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _test_allocation(counts: np.ndarray, test_fraction: float) -> np.ndarray:
    """Per-class test sizes.

    The total is ceil(fraction * n); each class gets floor(fraction * count)
    and the leftover rows go to the largest fractional remainders (lowest
    class first on ties). Every class stays within one row of
    round(fraction * count).
    """
    n = int(counts.sum())
    exact = test_fraction * counts.astype(np.float64)
    base = np.floor(exact + 1e-9).astype(np.int64)
    total = min(n, int(math.ceil(test_fraction * n - 1e-9)))
    leftover = total - int(base.sum())
    remainder = exact - base
    for k in sorted(range(len(counts)), key=lambda k: (-remainder[k], k)):
        if leftover <= 0:
            break
        if base[k] < counts[k]:
            base[k] += 1
            leftover -= 1
    return base


def stratified_split(ds: Dataset, test_fraction: float = 0.2, seed: int = 123) -> SplitPair:
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError("test_fraction must lie in [0, 1]")
    if ds.n_rows == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    counts = np.bincount(ds.labels, minlength=N_CLASSES)
    sizes = _test_allocation(counts, test_fraction)
    rng = np.random.default_rng(seed)
    in_test = np.zeros(ds.n_rows, dtype=bool)
    for k in range(N_CLASSES):
        members = np.flatnonzero(ds.labels == k)
        if len(members) == 0:
            continue
        members = members[rng.permutation(len(members))]
        in_test[members[: sizes[k]]] = True
    return SplitPair(
        train=ds.take(np.flatnonzero(~in_test)),
        test=ds.take(np.flatnonzero(in_test)),
        seed=seed,
        test_fraction=test_fraction,
    )
