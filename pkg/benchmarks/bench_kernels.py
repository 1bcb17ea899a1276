"""Compare the numba kernels with the pure-numpy fallback.

Run ``python benchmarks/bench_kernels.py [--repeat R]``. Each row times the
same call on both backends (after one warm-up call, so numba compile time is
excluded) and checks that the results agree.
"""

import argparse
import time

import numpy as np

from faabruno import _kernels
from faabruno.chain_rule import compose_eval
from faabruno.multilinear import tower_elementwise, tower_exp, tower_linear


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    for n in (4, 6, 8):
        f, g = tower_exp(0.0, n), tower_exp(1.0, n)
        dirs = [np.ones(1)] * n
        yield f"compose_eval exp.exp n={n}", \
            lambda b, g=g, f=f, d=dirs: compose_eval(g, f, d, backend=b)
    for n in (3, 5):
        f = tower_elementwise("sin", [0.1, 0.2, 0.3], n)
        lin = tower_linear(rng.normal(size=(3, 3)).tolist(), f.value, n)
        dirs = [rng.normal(size=3) for _ in range(n)]
        yield f"compose_eval linear.sin3 n={n}", \
            lambda b, g=lin, f=f, d=dirs: compose_eval(g, f, d, backend=b)
    flat = rng.normal(size=(3, 3 ** 6))
    vecs = rng.normal(size=(6, 3))
    yield "contract k=6 q=3", lambda b: _kernels.get_backend(b).contract(flat, vecs)
    yield "cover_coefficients n=4", lambda b: _kernels.get_backend(b).cover_coefficients(4)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'case':32s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  agree")
    for name, fn in cases():
        t_np, r_np = best_of(lambda: fn("numpy"), args.repeat)
        t_nb, r_nb = best_of(lambda: fn("numba"), args.repeat)
        agree = np.allclose(np.asarray(r_np, dtype=float), np.asarray(r_nb, dtype=float),
                            rtol=1e-12, atol=1e-12)
        print(f"{name:32s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
