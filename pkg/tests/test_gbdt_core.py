"""Objective, binning and kernel oracles."""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctg_boost import _kernels
from ctg_boost.gbdt import EmptyInputError, fit_bins
from ctg_boost.gbdt.binning import feature_thresholds
from ctg_boost.gbdt.objective import cross_entropy, grid_exponent, quantize, softmax, softmax_gradients

BACKENDS = _kernels.available()


def _fd_gradients(raw, label, eps=1e-5):
    # gradient from central differences of the loss, diagonal hessian from
    # central differences of the analytic gradient
    g = np.empty(len(raw))
    h = np.empty(len(raw))
    for k in range(len(raw)):
        e = np.zeros(len(raw))
        e[k] = eps
        g[k] = (cross_entropy(raw + e, [label]) - cross_entropy(raw - e, [label])) / (2 * eps)
        h[k] = (softmax_gradients(raw + e, label)[0][k] - softmax_gradients(raw - e, label)[0][k]) / (2 * eps)
    return g, h


@settings(max_examples=200, deadline=None)
@given(
    raw=st.lists(st.floats(-8, 8), min_size=3, max_size=3),
    label=st.integers(0, 2),
)
def test_gradient_matches_finite_differences(raw, label):
    raw = np.array(raw)
    g, h = softmax_gradients(raw, label)
    fd_g, fd_h = _fd_gradients(raw, label)
    assert np.allclose(g, fd_g, rtol=1e-6, atol=1e-9)
    assert np.allclose(h, np.maximum(fd_h, 1e-16), rtol=1e-6, atol=1e-9)


def test_gradient_matrix_form_matches_rows():
    rng = np.random.default_rng(0)
    raw = rng.normal(size=(20, 3))
    y = rng.integers(0, 3, 20)
    g, h = softmax_gradients(raw, y)
    for i in range(20):
        gi, hi = softmax_gradients(raw[i], y[i])
        assert np.array_equal(g[i], gi) and np.array_equal(h[i], hi)
    assert np.allclose(g.sum(axis=1), 0.0, atol=1e-15)


def test_softmax_is_shift_invariant_and_stable():
    p = softmax(np.array([1000.0, 1000.0, 1000.0]))
    assert np.allclose(p, 1 / 3)
    assert np.allclose(softmax(np.array([1.0, 2.0, 3.0])), softmax(np.array([101.0, 102.0, 103.0])))


def test_quantized_sums_are_order_independent():
    rng = np.random.default_rng(1)
    n = 5000
    g, h = rng.uniform(-1, 1, n), rng.uniform(0, 0.25, n)
    gq, hq = quantize(g, h, grid_exponent(n))
    assert np.all(np.abs(gq - g) <= 2.0 ** -grid_exponent(n))
    assert np.all(hq > 0)
    perm = rng.permutation(n)
    assert np.sum(gq) == np.sum(gq[perm]) == float(sum(gq[perm].tolist()))
    assert np.cumsum(hq)[-1] == np.cumsum(hq[perm])[-1]


# --- binning -----------------------------------------------------------------


def test_few_distinct_values_get_one_bin_each():
    x = np.array([3.0, 1.0, 2.0, 2.0, 1.0])
    th = feature_thresholds(x, 255)
    assert th.tolist() == [1.5, 2.5]


def test_adjacent_floats_stay_separated():
    a = 1.0
    b = np.nextafter(a, 2.0)
    th = feature_thresholds(np.array([a, b]), 255)
    m = fit_bins(np.array([[a], [b]]))
    assert m.transform(np.array([[a], [b]]))[:, 0].tolist() == [0, 1]
    assert th[0] == a


def _quantile_oracle(values, max_bins):
    # independent restatement: bound j sits between sorted[pos-1] and sorted[pos],
    # pos = round(j * n / max_bins); bounds in runs of ties collapse.
    s = sorted(values.tolist())
    n = len(s)
    out = set()
    for j in range(1, max_bins):
        pos = min(max(int(j * n / max_bins + 0.5), 1), n - 1)
        lo, hi = s[pos - 1], s[pos]
        if lo < hi:
            mid = lo + (hi - lo) / 2
            out.add(lo if mid >= hi else mid)
        else:
            out.add(lo)
    return sorted(v for v in out if v < s[-1])


def test_quantile_bins_match_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = np.round(rng.normal(size=rng.integers(300, 2000)) * rng.choice([1, 10, 1000]), 2)
        for mb in (4, 16, 255):
            if len(np.unique(x)) > mb:
                assert feature_thresholds(x, mb).tolist() == _quantile_oracle(x, mb)


@settings(max_examples=80, deadline=None)
@given(
    values=st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=400),
    max_bins=st.integers(2, 255),
)
def test_binning_properties(values, max_bins):
    x = np.array(values)[:, None]
    m = fit_bins(x, max_bins)
    b = m.transform(x)[:, 0]
    th = m.thresholds[0]
    assert m.n_bins[0] <= max_bins
    assert np.all(np.diff(th) > 0)
    # monotone map, and bin <= t exactly when x <= threshold t
    order = np.argsort(x[:, 0], kind="stable")
    assert np.all(np.diff(b[order].astype(int)) >= 0)
    for t in range(len(th)):
        assert np.array_equal(b <= t, x[:, 0] <= th[t])
    # equal values share a bin
    for v in np.unique(x):
        assert len(np.unique(b[x[:, 0] == v])) == 1


def test_fit_bins_rejects_empty():
    with pytest.raises(EmptyInputError):
        fit_bins(np.zeros((0, 3)))


# --- kernels -----------------------------------------------------------------


def _node(rng, n=None, n_features=None, n_bins_max=None):
    n = n or int(rng.integers(2, 65))
    n_features = n_features or int(rng.integers(1, 9))
    n_bins_max = n_bins_max or int(rng.integers(2, 12))
    n_bins = rng.integers(2, n_bins_max + 1, size=n_features)
    binned = np.column_stack([rng.integers(0, nb, size=n) for nb in n_bins]).astype(np.uint8)
    exp = grid_exponent(n)
    # few distinct gradient values so exact gain ties actually occur
    g = rng.choice([-0.75, -0.5, -0.25, 0.125, 0.5], size=n)
    h = rng.choice([0.0625, 0.125, 0.25], size=n)
    g, h = quantize(g, h, exp)
    return binned, g, h, n_bins.astype(np.intp), n_bins_max


def _naive_histogram(binned, samples, g, h, n_bins_max):
    F = binned.shape[1]
    G, H, C = np.zeros((F, n_bins_max)), np.zeros((F, n_bins_max)), np.zeros((F, n_bins_max), dtype=np.int64)
    for i in samples:
        for f in range(F):
            b = binned[i, f]
            G[f, b] += g[i]
            H[f, b] += h[i]
            C[f, b] += 1
    return G, H, C


def _thr(gs, alpha):
    return np.sign(gs) * max(abs(gs) - alpha, 0.0)


def _brute_force_split(binned, g, h, n_bins, msl, mcw, msg, alpha, lam):
    n = len(g)
    G, H = g.sum(), h.sum()
    parent = _thr(G, alpha) ** 2 / (H + lam)
    best = None
    for f in range(binned.shape[1]):
        for b in range(int(n_bins[f]) - 1):
            left = binned[:, f] <= b
            nl = int(left.sum())
            gl, hl = g[left].sum(), h[left].sum()
            gr, hr = G - gl, H - hl
            if nl < msl or n - nl < msl or hl < mcw or hr < mcw:
                continue
            if hl + lam <= 0 or hr + lam <= 0:
                continue
            gain = _thr(gl, alpha) ** 2 / (hl + lam) + _thr(gr, alpha) ** 2 / (hr + lam) - parent
            if gain > msg and (best is None or gain > best[2]):
                best = (f, b, gain, nl)
    return best


@pytest.mark.parametrize("backend", BACKENDS)
def test_histogram_matches_naive(backend):
    k = _kernels.get(backend)
    rng = np.random.default_rng(3)
    for _ in range(50):
        binned, g, h, n_bins, nbm = _node(rng)
        samples = np.sort(rng.choice(len(g), size=rng.integers(0, len(g) + 1), replace=False)).astype(np.intp)
        got = k.build_histogram(binned, samples, g, h, nbm)
        want = _naive_histogram(binned, samples, g, h, nbm)
        for a, b in zip(got, want):
            assert np.array_equal(a, b)


@pytest.mark.parametrize("backend", BACKENDS)
def test_split_matches_exhaustive_enumeration(backend):
    k = _kernels.get(backend)
    rng = np.random.default_rng(4)
    for trial in range(200):
        binned, g, h, n_bins, nbm = _node(rng)
        msl = int(rng.integers(1, 6))
        lam = float(rng.choice([0.0, 0.0, 1.0]))
        alpha = float(rng.choice([0.0, 0.0, 0.1]))
        samples = np.arange(len(g), dtype=np.intp)
        hist = k.build_histogram(binned, samples, g, h, nbm)
        f, b, gain, lg, lh, ln = k.find_best_split(
            *hist, n_bins, g.sum(), h.sum(), len(g), msl, 1e-3, 0.0, alpha, lam
        )
        want = _brute_force_split(binned, g, h, n_bins, msl, 1e-3, 0.0, alpha, lam)
        if want is None:
            assert f == -1, trial
            continue
        assert (f, b) == want[:2], trial
        assert abs(gain - want[2]) <= 1e-9 * max(1.0, abs(want[2]))
        assert ln == want[3]
        left = binned[:, f] <= b
        assert lg == g[left].sum() and lh == h[left].sum()


@pytest.mark.parametrize("backend", BACKENDS)
def test_partition_and_route(backend):
    k = _kernels.get(backend)
    rng = np.random.default_rng(5)
    binned = rng.integers(0, 10, size=(200, 3)).astype(np.uint8)
    samples = np.sort(rng.choice(200, 120, replace=False)).astype(np.intp)
    left, right = k.partition(binned, samples, 1, 4)
    assert np.array_equal(left, samples[binned[samples, 1] <= 4])
    assert np.array_equal(right, samples[binned[samples, 1] > 4])
    # stump with a nested right split
    feature = np.array([0, -1, 2, -1, -1], dtype=np.intp)
    threshold = np.array([3, -1, 6, -1, -1], dtype=np.intp)
    lft = np.array([1, -1, 3, -1, -1], dtype=np.intp)
    rgt = np.array([2, -1, 4, -1, -1], dtype=np.intp)
    got = k.route(binned, feature, threshold, lft, rgt)
    want = np.where(binned[:, 0] <= 3, 1, np.where(binned[:, 2] <= 6, 3, 4))
    assert np.array_equal(got, want)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_backends_agree_bitwise_on_random_nodes():
    py, cy = _kernels.get("python"), _kernels.get("cython")
    rng = np.random.default_rng(6)
    for _ in range(100):
        binned, g, h, n_bins, nbm = _node(rng, n=int(rng.integers(2, 500)))
        s = np.arange(len(g), dtype=np.intp)
        hp, hc = py.build_histogram(binned, s, g, h, nbm), cy.build_histogram(binned, s, g, h, nbm)
        for a, b in zip(hp, hc):
            assert np.array_equal(a, b)
        args = (n_bins, g.sum(), h.sum(), len(g), 2, 1e-3, 0.0, 0.0, 0.0)
        assert py.find_best_split(*hp, *args) == cy.find_best_split(*hc, *args)


def test_kernel_selector():
    assert "python" in _kernels.available()
    assert _kernels.get("python").NAME == "python"
    assert _kernels.get() is _kernels.default
    with pytest.raises(ValueError):
        _kernels.get("fortran")


def test_tie_break_lowest_feature_then_bin():
    # two identical features, the split must use feature 0, lowest bin
    binned = np.array([[0, 0], [1, 1], [2, 2], [3, 3]], dtype=np.uint8)
    g = np.array([-1.0, -1.0, 1.0, 1.0])
    h = np.ones(4)
    for name in BACKENDS:
        k = _kernels.get(name)
        hist = k.build_histogram(binned, np.arange(4, dtype=np.intp), g, h, 4)
        f, b, *_ = k.find_best_split(*hist, np.array([4, 4], dtype=np.intp), 0.0, 4.0, 4, 1, 0.0, 0.0, 0.0, 0.0)
        assert (f, b) == (0, 1)


def test_exhaustive_tiny_grid():
    # every labelling of a 4-row, 1-feature node: kernel equals brute force
    binned = np.arange(4, dtype=np.uint8)[:, None]
    for signs in itertools.product([-0.5, 0.5], repeat=4):
        g = np.array(signs)
        h = np.full(4, 0.25)
        for name in BACKENDS:
            k = _kernels.get(name)
            hist = k.build_histogram(binned, np.arange(4, dtype=np.intp), g, h, 4)
            f, b, gain, *_ = k.find_best_split(*hist, np.array([4], dtype=np.intp), g.sum(), 1.0, 4,
                                               1, 0.0, 0.0, 0.0, 0.0)
            want = _brute_force_split(binned, g, h, [4], 1, 0.0, 0.0, 0.0, 0.0)
            assert (f == -1) if want is None else ((f, b) == want[:2] and gain == want[2])


def test_pure_python_fallback_is_selected_by_env():
    import os
    import subprocess
    import sys

    env = {**os.environ, "CTG_BOOST_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import ctg_boost; print(ctg_boost.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_uniform_bin_populations_match_exact_quantiles():
    x = np.random.default_rng(7).uniform(size=10_000)
    th = feature_thresholds(x, 255)
    assert th.tolist() == _quantile_oracle(x, 255)
    pop = np.bincount(np.searchsorted(th, x, side="left"), minlength=255)
    assert len(pop) == 255
    assert np.all(np.abs(pop - 10_000 / 255) <= 0.2 * 10_000 / 255)
