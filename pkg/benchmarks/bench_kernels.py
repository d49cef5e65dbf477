"""Compare the compiled summation kernels with the numpy fallback.

Run ``python benchmarks/bench_kernels.py`` after building the extension.
"""

import argparse
import timeit

import numpy as np

from xaskey import _fallback

try:
    from xaskey import _kernels
except ImportError:
    _kernels = None


def _case(npts, p, n, seed=0):
    rng = np.random.default_rng(seed)
    num = rng.uniform(-1, 1, (npts, p)) + 1j * rng.uniform(-1, 1, (npts, p))
    den = 1.5 + rng.uniform(0, 1, (npts, p - 1)) + 0.1j
    return num, den


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    cases = [("4F3", 0.0), ("4phi3", 0.5)]
    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])
    print(f"{'series':<8}{'backend':<9}{'best ms':>10}{'max rel diff':>14}")
    for name, q in cases:
        num, den = _case(args.points, 4, args.n)
        ref = None
        for label, mod in backends:
            f = lambda: mod.terminating_sum(num, den, 1.0 if q == 0 else q, q, args.n, False)
            t = min(timeit.repeat(f, number=1, repeat=args.repeat)) * 1e3
            val = f()[0]
            diff = 0.0 if ref is None else float(np.max(np.abs(val - ref) / np.abs(ref)))
            ref = val if ref is None else ref
            print(f"{name:<8}{label:<9}{t:>10.2f}{diff:>14.2e}")
    a = np.linspace(0.1, 0.9, args.points) * np.exp(0.3j)
    for label, mod in backends:
        t = min(timeit.repeat(lambda: mod.q_product(a, 0.7, 120), number=1, repeat=args.repeat)) * 1e3
        print(f"{'qprod':<8}{label:<9}{t:>10.2f}")
    if _kernels is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
