"""Pure numpy kernels; the reference semantics for ``_ckernels``.

Gradients and hessians reaching these functions are multiples of a common
power-of-two grid, so every histogram sum below is exact and independent of
summation order. Both backends therefore produce bit-identical output.
"""
import numpy as np

NAME = "python"


def build_histogram(binned, samples, g, h, n_bins_max):
    n_features = binned.shape[1]
    size = n_features * n_bins_max
    if len(samples) == 0:
        return np.zeros((n_features, n_bins_max)), np.zeros((n_features, n_bins_max)), np.zeros(
            (n_features, n_bins_max), dtype=np.int64
        )
    offsets = np.arange(n_features, dtype=np.intp) * n_bins_max
    flat = (binned[samples].astype(np.intp) + offsets).ravel()
    hist_g = np.bincount(flat, weights=np.repeat(g[samples], n_features), minlength=size)
    hist_h = np.bincount(flat, weights=np.repeat(h[samples], n_features), minlength=size)
    hist_c = np.bincount(flat, minlength=size).astype(np.int64)
    shape = (n_features, n_bins_max)
    return hist_g.reshape(shape), hist_h.reshape(shape), hist_c.reshape(shape)


def _objective(grad, hess, reg_alpha, reg_lambda):
    if reg_alpha != 0.0:
        grad = np.copysign(np.maximum(np.abs(grad) - reg_alpha, 0.0), grad)
    return grad * grad / (hess + reg_lambda)


def find_best_split(
    hist_g, hist_h, hist_c, n_bins, parent_g, parent_h, parent_n,
    min_samples_leaf, min_child_weight, min_split_gain, reg_alpha, reg_lambda,
):
    """Return (feature, bin, gain, left_g, left_h, left_n); feature -1 if none."""
    left_g = np.cumsum(hist_g, axis=1)
    left_h = np.cumsum(hist_h, axis=1)
    left_n = np.cumsum(hist_c, axis=1)
    right_g = parent_g - left_g
    right_h = parent_h - left_h
    right_n = parent_n - left_n

    bins = np.arange(hist_g.shape[1])
    ok = bins[None, :] <= (np.asarray(n_bins)[:, None] - 2)
    ok &= (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
    ok &= (left_h >= min_child_weight) & (right_h >= min_child_weight)
    ok &= (left_h + reg_lambda > 0.0) & (right_h + reg_lambda > 0.0)
    if not ok.any():
        return -1, -1, 0.0, 0.0, 0.0, 0
    parent_obj = _objective(np.float64(parent_g), np.float64(parent_h), reg_alpha, reg_lambda)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = (
            _objective(left_g, left_h, reg_alpha, reg_lambda)
            + _objective(right_g, right_h, reg_alpha, reg_lambda)
        ) - parent_obj
    gain = np.where(ok & (gain > min_split_gain), gain, -np.inf)
    best = int(np.argmax(gain))
    f, b = divmod(best, hist_g.shape[1])
    if gain[f, b] == -np.inf:
        return -1, -1, 0.0, 0.0, 0.0, 0
    return f, b, float(gain[f, b]), float(left_g[f, b]), float(left_h[f, b]), int(left_n[f, b])


def partition(binned, samples, feature, threshold):
    go_left = binned[samples, feature] <= threshold
    return samples[go_left], samples[~go_left]


def route(binned, feature, threshold, left, right):
    """Leaf node index reached by each binned row."""
    node = np.zeros(len(binned), dtype=np.intp)
    rows = np.arange(len(binned))
    active = left[node] >= 0
    while active.any():
        r = rows[active]
        nd = node[r]
        go_left = binned[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])
        active = left[node] >= 0
    return node
