"""Compare the numba and numpy edit-distance backends.

    python benchmarks/bench_kernels.py [--pairs 2000] [--repeat 5]

Times matrix fill + traceback over random sentence pairs at a few lengths
and checks that both backends return identical matrices and traces.
"""

import argparse
import time

import numpy as np

from spellforge import _kernels as K


def make_pairs(rng, n, length, alphabet=27):
    out = []
    for _ in range(n):
        a = rng.integers(0, alphabet, length).astype(np.int32)
        b = a.copy()
        # roughly 5% character noise, like a corrupted sentence
        hits = rng.random(length) < 0.05
        b[hits] = rng.integers(0, alphabet, int(hits.sum()))
        out.append((a, b))
    return out


def run(fill, trace, pairs):
    total = 0
    for a, b in pairs:
        d = fill(a, b, True)
        total += trace(d, a, b, True).shape[0]
    return total


def best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--lengths", type=int, nargs="+", default=[16, 64, 256])
    args = ap.parse_args()

    if K.fill_matrix_jit is None:
        raise SystemExit("numba is not installed; only the numpy backend is available")

    rng = np.random.default_rng(0)
    warm = make_pairs(rng, 2, 8)
    run(K.fill_matrix_jit, K.trace_jit, warm)  # compile (or load the on-disk cache)

    print(f"{'length':>7} {'pairs':>6} {'numpy s':>9} {'numba s':>9} {'speedup':>8}")
    for length in args.lengths:
        n = max(1, args.pairs * 64 // max(length, 64))
        pairs = make_pairs(rng, n, length)
        for a, b in pairs[:20]:
            d_np = K.fill_matrix_numpy(a, b, True)
            assert np.array_equal(d_np, K.fill_matrix_jit(a, b, True))
            assert np.array_equal(K.trace_numpy(d_np, a, b, True), K.trace_jit(d_np, a, b, True))
        t_np = best_of(args.repeat, run, K.fill_matrix_numpy, K.trace_numpy, pairs)
        t_jit = best_of(args.repeat, run, K.fill_matrix_jit, K.trace_jit, pairs)
        print(f"{length:>7} {n:>6} {t_np:>9.4f} {t_jit:>9.4f} {t_np / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
