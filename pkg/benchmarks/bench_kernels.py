"""Compare the compiled kernels with the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--seed 0]

Reports the best-of-``repeat`` wall time of each backend and the speedup
for the sparse Poisson bracket (exact and float coefficients), batched
evaluation, batched gradients and one full exact normalization.
"""
from __future__ import annotations

import argparse
import random
import time

import numpy as np

from birkhoff import _kernels_py as pure
from birkhoff.coeffs import GaussQ
from birkhoff.series import TruncatedSeries, monomials_of_degree

try:
    from birkhoff import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def random_series(rng, n, order, density, exact):
    terms = {}
    for k in range(2, order + 1):
        for mono in monomials_of_degree(2 * n, k):
            if rng.random() < density:
                if exact:
                    terms[mono] = GaussQ(rng.randint(-3, 3), rng.randint(-3, 3))
                else:
                    terms[mono] = complex(rng.gauss(0, 1), rng.gauss(0, 1))
    return TruncatedSeries(n, order, terms, exact)


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_normalize(kernel_module, H, m):
    from birkhoff import kernels, normalizer

    saved = kernels.bracket
    import birkhoff.series as series

    series.kernels.bracket = kernel_module.bracket
    try:
        t0 = time.perf_counter()
        normalizer.normalize(H, m)
        return time.perf_counter() - t0
    finally:
        series.kernels.bracket = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return 1
    rng = random.Random(args.seed)
    rows = []
    for exact in (True, False):
        for n, order, dens in ((2, 8, 0.3), (3, 6, 0.3), (4, 6, 0.2)):
            A = random_series(rng, n, order, dens, exact)
            B = random_series(rng, n, order, dens, exact)
            a, b = list(A.terms.items()), list(B.terms.items())
            assert compiled.bracket(a, b, n, order) == pure.bracket(a, b, n, order) or not exact
            tp = best_time(lambda: pure.bracket(a, b, n, order), args.repeat)
            tc = best_time(lambda: compiled.bracket(a, b, n, order), args.repeat)
            kind = "exact" if exact else "float"
            rows.append((f"bracket {kind} n={n} order={order} ({len(a)}x{len(b)} terms)", tp, tc))
    nprng = np.random.default_rng(args.seed)
    for n, order in ((2, 12), (3, 8)):
        A = random_series(rng, n, order, 0.5, False)
        exps, coefs = A.compiled()
        Z = 0.1 * (nprng.normal(size=(256, 2 * n)) + 1j * nprng.normal(size=(256, 2 * n)))
        tp = best_time(lambda: pure.eval_batch(exps, coefs, Z), args.repeat)
        tc = best_time(lambda: compiled.eval_batch(exps, coefs, Z), args.repeat)
        rows.append((f"eval_batch n={n} ({len(A)} terms, 256 points)", tp, tc))
        tp = best_time(lambda: pure.eval_jac(exps, coefs, Z), args.repeat)
        tc = best_time(lambda: compiled.eval_jac(exps, coefs, Z), args.repeat)
        rows.append((f"eval_jac n={n} ({len(A)} terms, 256 points)", tp, tc))
    H = random_series(rng, 2, 8, 0.3, True)
    H = (H.filter(lambda m: sum(m) > 2) + TruncatedSeries.action(2, (1, 2), 8))
    rows.append(("normalize exact n=2 order 8",
                 min(bench_normalize(pure, H, 8) for _ in range(args.repeat)),
                 min(bench_normalize(compiled, H, 8) for _ in range(args.repeat))))
    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'python [s]':>11}  {'cython [s]':>11}  {'speedup':>8}")
    for name, tp, tc in rows:
        print(f"{name:<{width}}  {tp:11.5f}  {tc:11.5f}  {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
