"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_backends.py [--rows 4965] [--repeat 3]

Times histogram construction, split search and full training per backend and
checks that both backends produce the same model document.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

from ctg_boost import _kernels
from ctg_boost.gbdt import GbdtConfig, dumps_model, fit_bins, train
from ctg_boost.gbdt.objective import grid_exponent, quantize, softmax_gradients

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from synthetic import ctg_like  # noqa: E402


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=4965)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-estimators", type=int, default=100)
    args = ap.parse_args()

    share = np.array([1655, 295, 176]) / 2126
    ds = ctg_like(tuple(np.maximum((share * args.rows).astype(int), 2)), seed=0)
    mapper = fit_bins(ds.features)
    binned = np.ascontiguousarray(mapper.transform(ds.features))
    raw = np.zeros((ds.n_rows, 3))
    g, h = softmax_gradients(raw, ds.labels)
    g, h = quantize(np.ascontiguousarray(g[:, 0]), np.ascontiguousarray(h[:, 0]), grid_exponent(ds.n_rows))
    samples = np.arange(ds.n_rows, dtype=np.intp)
    nbm = int(mapper.n_bins.max())
    cfg = GbdtConfig(n_estimators=args.n_estimators)

    print(f"{ds.n_rows} rows x {ds.features.shape[1]} features, best of {args.repeat}")
    print(f"{'backend':<8}{'histogram ms':>14}{'split ms':>10}{'train s':>9}")
    results, docs = {}, {}
    for name in _kernels.available():
        k = _kernels.get(name)
        hist = k.build_histogram(binned, samples, g, h, nbm)
        t_hist = best_of(lambda: k.build_histogram(binned, samples, g, h, nbm), args.repeat * 5)
        t_split = best_of(
            lambda: k.find_best_split(*hist, mapper.n_bins, g.sum(), h.sum(), ds.n_rows, 20, 1e-3, 0.0, 0.0, 0.0),
            args.repeat * 5,
        )
        t_train = best_of(lambda: docs.__setitem__(name, dumps_model(train(ds, cfg, kernels=k))), args.repeat)
        results[name] = t_train
        print(f"{name:<8}{t_hist * 1e3:>14.3f}{t_split * 1e3:>10.3f}{t_train:>9.2f}")

    if len(docs) == 2:
        print(f"speed-up (train): {results['python'] / results['cython']:.1f}x")
        print("model documents identical:", docs["python"] == docs["cython"])
    else:
        print("compiled kernels not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
