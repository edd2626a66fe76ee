"""Reference classifiers and the ``ModelSpec`` dispatch used by the harness."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gbdt
from .dataset import N_CLASSES, Dataset
from .errors import EmptyDatasetError, TooFewSamplesError

MODEL_KINDS = ("gbdt", "dummy", "cart", "knn")
DISPLAY_NAMES = {
    "gbdt": "Gradient Boosting (histogram, leaf-wise)",
    "cart": "Decision Tree Classifier",
    "knn": "K Neighbors Classifier",
    "dummy": "Dummy Classifier",
}


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "gbdt"
    gbdt: gbdt.GbdtConfig = field(default_factory=gbdt.GbdtConfig)
    cart_min_samples_leaf: int = 1
    knn_k: int = 5
    knn_standardize: bool = True
    seed: int = 123
    name: str | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.cart_min_samples_leaf < 1:
            raise ValueError("cart_min_samples_leaf must be >= 1")
        if self.knn_k < 1:
            raise ValueError("knn_k must be >= 1")

    @property
    def label(self) -> str:
        return self.name or self.kind

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "name": self.label, "seed": self.seed}
        if self.kind == "gbdt":
            d["gbdt"] = self.gbdt.to_dict()
        elif self.kind == "cart":
            d["min_samples_leaf"] = self.cart_min_samples_leaf
        elif self.kind == "knn":
            d.update(k=self.knn_k, standardize=self.knn_standardize)
        return d


def _require_rows(train: Dataset):
    if train.n_rows == 0:
        raise EmptyDatasetError("training set is empty")


def _argmax_lowest(p: np.ndarray) -> np.ndarray:
    return np.argmax(p, axis=-1)


class DummyClassifier:
    """Always predicts the modal training class; lowest index wins ties."""

    def fit(self, train: Dataset):
        _require_rows(train)
        counts = np.bincount(train.labels, minlength=N_CLASSES)
        self.prior_ = counts / counts.sum()
        self.mode_ = int(np.argmax(counts))
        return self

    def predict_proba(self, x) -> np.ndarray:
        return np.tile(self.prior_, (len(np.atleast_2d(x)), 1))

    def predict(self, x) -> np.ndarray:
        return np.full(len(np.atleast_2d(x)), self.mode_, dtype=np.int64)


def dummy_fit_predict(train: Dataset, rows) -> np.ndarray:
    return DummyClassifier().fit(train).predict(rows)


def _gini_scores(y_sorted: np.ndarray, n_classes: int):
    """Sum of squared class counts over size, for every prefix and suffix."""
    onehot = np.zeros((len(y_sorted), n_classes))
    onehot[np.arange(len(y_sorted)), y_sorted] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left
    n_left = np.arange(1, len(y_sorted), dtype=np.float64)
    n_right = len(y_sorted) - n_left
    return (left * left).sum(axis=1) / n_left + (right * right).sum(axis=1) / n_right, n_left


def best_gini_split(x: np.ndarray, y: np.ndarray, min_samples_leaf: int = 1, n_classes: int = N_CLASSES):
    """Best (feature, threshold, impurity decrease) over midpoints, or None.

    Impurity decrease is n*gini(parent) - n_l*gini(l) - n_r*gini(r). Ties keep
    the lowest feature, then the lowest threshold.
    """
    n = len(y)
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent = (counts * counts).sum() / n
    best = None
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs, ys = x[order, f], y[order]
        score, n_left = _gini_scores(ys, n_classes)
        valid = (xs[1:] > xs[:-1]) & (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
        if not valid.any():
            continue
        score = np.where(valid, score, -np.inf)
        i = int(np.argmax(score))
        gain = float(score[i] - parent)
        if best is None or gain > best[2]:
            lo, hi = xs[i], xs[i + 1]
            mid = lo + (hi - lo) / 2.0
            best = (f, float(lo if mid >= hi else mid), gain)
    return best


class CartClassifier:
    """Gini CART on exact midpoint thresholds.

    Any impure node with a valid split is split, even when the best decrease is
    zero (XOR-like layouts need it); growth stops at pure nodes or when every
    feature is constant within the node.
    """

    def __init__(self, min_samples_leaf: int = 1):
        self.min_samples_leaf = min_samples_leaf

    def fit(self, train: Dataset):
        _require_rows(train)
        x, y = train.features, train.labels
        feature, threshold, left, right, dist = [], [], [], [], []

        def new_node():
            for arr in (feature, left, right):
                arr.append(-1)
            threshold.append(np.nan)
            dist.append(None)
            return len(left) - 1

        root = new_node()
        stack = [(root, np.arange(len(y)))]
        while stack:
            node, idx = stack.pop()
            counts = np.bincount(y[idx], minlength=N_CLASSES)
            dist[node] = counts / counts.sum()
            if np.count_nonzero(counts) <= 1 or len(idx) < 2 * self.min_samples_leaf:
                continue
            split = best_gini_split(x[idx], y[idx], self.min_samples_leaf)
            if split is None:
                continue
            f, t, _ = split
            go_left = x[idx, f] <= t
            l, r = new_node(), new_node()
            feature[node], threshold[node], left[node], right[node] = f, t, l, r
            stack.append((r, idx[~go_left]))
            stack.append((l, idx[go_left]))

        self.feature_ = np.array(feature, dtype=np.intp)
        self.threshold_ = np.array(threshold)
        self.left_ = np.array(left, dtype=np.intp)
        self.right_ = np.array(right, dtype=np.intp)
        self.dist_ = np.array(dist)
        return self

    @property
    def n_nodes(self) -> int:
        return len(self.left_)

    def apply(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        node = np.zeros(len(x), dtype=np.intp)
        active = self.left_[node] >= 0
        while active.any():
            r = np.flatnonzero(active)
            nd = node[r]
            go_left = x[r, self.feature_[nd]] <= self.threshold_[nd]
            node[r] = np.where(go_left, self.left_[nd], self.right_[nd])
            active = self.left_[node] >= 0
        return node

    def predict_proba(self, x) -> np.ndarray:
        return self.dist_[self.apply(x)]

    def predict(self, x) -> np.ndarray:
        return _argmax_lowest(self.predict_proba(x))


def cart_train(train: Dataset, spec: ModelSpec = ModelSpec("cart")) -> CartClassifier:
    return CartClassifier(spec.cart_min_samples_leaf).fit(train)


class KnnClassifier:
    def __init__(self, k: int = 5, standardize: bool = True):
        self.k = k
        self.standardize = standardize

    def fit(self, train: Dataset):
        _require_rows(train)
        if train.n_rows < self.k:
            raise TooFewSamplesError(f"k={self.k} exceeds the {train.n_rows} training rows")
        x = train.features
        if self.standardize:
            self.mean_ = x.mean(axis=0)
            std = x.std(axis=0)
            self.keep_ = std > 0
            self.scale_ = np.where(self.keep_, std, 1.0)
        else:
            self.mean_ = np.zeros(x.shape[1])
            self.scale_ = np.ones(x.shape[1])
            self.keep_ = np.ones(x.shape[1], dtype=bool)
        self.x_ = self._transform(x)
        self.y_ = train.labels
        self.row_ids_ = train.row_ids
        return self

    def _transform(self, x):
        z = (np.atleast_2d(np.asarray(x, dtype=np.float64)) - self.mean_) / self.scale_
        return np.ascontiguousarray(z[:, self.keep_])

    def neighbors(self, x) -> np.ndarray:
        """Training positions of the k nearest rows; distance ties go to the lower row id."""
        z = self._transform(x)
        out = np.empty((len(z), self.k), dtype=np.intp)
        for i, q in enumerate(z):
            diff = self.x_ - q
            d = np.einsum("ij,ij->i", diff, diff)
            out[i] = np.lexsort((self.row_ids_, d))[: self.k]
        return out

    def predict_proba(self, x) -> np.ndarray:
        nb = self.neighbors(x)
        votes = np.zeros((len(nb), N_CLASSES))
        for c in range(N_CLASSES):
            votes[:, c] = (self.y_[nb] == c).sum(axis=1)
        return votes / self.k

    def predict(self, x) -> np.ndarray:
        return _argmax_lowest(self.predict_proba(x))


def knn_predict(train: Dataset, spec: ModelSpec, row) -> int:
    model = KnnClassifier(spec.knn_k, spec.knn_standardize).fit(train)
    return int(model.predict(np.atleast_2d(row))[0])


class GbdtClassifier:
    """Adapter giving the booster the same fit/predict surface as the baselines."""

    def __init__(self, cfg: gbdt.GbdtConfig, n_threads: int | None = 1):
        self.cfg = cfg
        self.n_threads = n_threads

    def fit(self, train: Dataset):
        self.model_ = gbdt.train(train, self.cfg, n_threads=self.n_threads)
        return self

    def predict_proba(self, x) -> np.ndarray:
        return gbdt.predict_proba(self.model_, np.atleast_2d(x))

    def predict(self, x) -> np.ndarray:
        return _argmax_lowest(self.predict_proba(x))


def make_model(spec: ModelSpec, n_threads: int | None = 1):
    if spec.kind == "gbdt":
        return GbdtClassifier(spec.gbdt, n_threads)
    if spec.kind == "cart":
        return CartClassifier(spec.cart_min_samples_leaf)
    if spec.kind == "knn":
        return KnnClassifier(spec.knn_k, spec.knn_standardize)
    return DummyClassifier()
