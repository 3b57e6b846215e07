"""Time the monodromy path sum: compiled kernel against the numpy fallback.

Run ``python3 benchmarks/bench_transfer.py``.  Both backends are checked to
agree before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from u1aba import kernels, xxz
from u1aba.common import Lattice


def site_weights(N: int, L: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pv = xxz.provider(xxz.XxzSpec(N, 0.37))
    lat = Lattice(tuple(rng.uniform(-0.3, 0.3, L) + 1j * rng.uniform(-0.3, 0.3, L)))
    return np.stack([pv.site(0.2 + 0.1j, mu) for mu in lat.mus])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'N':>3} {'L':>3} {'dim':>6} {'numpy [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for N, L in [(2, 4), (2, 6), (3, 3), (3, 4), (3, 5), (4, 4)]:
        W = site_weights(N, L)
        ref = kernels.python_path_sum(W)
        tp = min(timeit.repeat(lambda: kernels.python_path_sum(W), number=1, repeat=args.repeat))
        if kernels.compiled_path_sum is None:
            print(f"{N:>3} {L:>3} {N**L:>6} {tp:>11.4f} {'n/a':>11} {'':>8}")
            continue
        fast = kernels.compiled_path_sum(W)
        if not np.allclose(fast, ref, rtol=1e-13, atol=1e-14):
            raise SystemExit(f"backends disagree at N={N}, L={L}")
        tc = min(timeit.repeat(lambda: kernels.compiled_path_sum(W), number=1, repeat=args.repeat))
        print(f"{N:>3} {L:>3} {N**L:>6} {tp:>11.4f} {tc:>11.4f} {tp / tc:>8.1f}")


if __name__ == "__main__":
    main()
