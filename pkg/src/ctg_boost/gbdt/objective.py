"""Multiclass softmax cross-entropy and its derivatives."""
import numpy as np

HESSIAN_FLOOR = 1e-16


def softmax(raw: np.ndarray) -> np.ndarray:
    raw = np.asarray(raw, dtype=np.float64)
    z = raw - raw.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_gradients(raw_scores, labels):
    """Per-class gradient and hessian of the cross-entropy.

    Accepts one score vector with a scalar label, or an (n, K) matrix with n
    labels. g = p - onehot, h = max(p (1 - p), 1e-16).
    """
    raw = np.asarray(raw_scores, dtype=np.float64)
    p = softmax(raw)
    onehot = np.zeros_like(p)
    labels = np.asarray(labels)
    if raw.ndim == 1:
        onehot[int(labels)] = 1.0
    else:
        onehot[np.arange(len(p)), labels] = 1.0
    g = p - onehot
    h = np.maximum(p * (1.0 - p), HESSIAN_FLOOR)
    return g, h


def cross_entropy(raw_scores, labels) -> float:
    """Mean negative log-likelihood, computed through log-sum-exp."""
    raw = np.atleast_2d(np.asarray(raw_scores, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    m = raw.max(axis=1)
    lse = m + np.log(np.exp(raw - m[:, None]).sum(axis=1))
    return float(np.mean(lse - raw[np.arange(len(raw)), labels]))


def grid_exponent(n_samples: int) -> int:
    """Power-of-two grid on which sums of n gradients stay exact in float64."""
    return 52 - max(int(n_samples), 1).bit_length()


def quantize(g: np.ndarray, h: np.ndarray, exponent: int):
    """Snap g and h to multiples of 2**-exponent; h keeps at least one step."""
    scale = float(2.0 ** exponent)
    step = 1.0 / scale
    gq = np.rint(g * scale) * step
    hq = np.maximum(np.rint(h * scale), 1.0) * step
    return gq, hq
