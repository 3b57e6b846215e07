"""Pure numpy monodromy path sum (fallback for the compiled kernel)."""
from __future__ import annotations

import numpy as np


def config_digits(nq: int, L: int) -> np.ndarray:
    """Rows are site occupations (0-based) of each basis state, site 1 most significant."""
    D = nq**L
    return np.array(np.unravel_index(np.arange(D), (nq,) * L)).T.astype(np.int64)


def path_sum(W: np.ndarray) -> np.ndarray:
    """All monodromy entries <b|T_{a,c}|d> from per-site weights.

    ``W[l, x, b, y, d]`` is R(lam, mu_l)_{x,b}^{y,d} (0-based).  The ice rule
    fixes the auxiliary path ``x_l = x_{l-1} + d_l - b_l`` so each entry is a
    single product.  Returns ``out[a, c, b_cfg, d_cfg]``.
    """
    W = np.ascontiguousarray(W, dtype=complex)
    L, na, nq = W.shape[0], W.shape[1], W.shape[2]
    dig = config_digits(nq, L)
    D = dig.shape[0]
    out = np.zeros((na, na, D, D), dtype=complex)
    bi, di = np.meshgrid(np.arange(D), np.arange(D), indexing="ij")
    bi, di = bi.ravel(), di.ravel()
    for c in range(na):
        x = np.full(bi.shape, c, dtype=np.int64)
        val = np.ones(bi.shape, dtype=complex)
        alive = np.ones(bi.shape, dtype=bool)
        for l in range(L):
            b = dig[bi, l]
            d = dig[di, l]
            xn = x + d - b
            alive &= (xn >= 0) & (xn < na)
            xs = np.clip(xn, 0, na - 1)
            val = np.where(alive, val * W[l, xs, b, x, d], 0)
            x = xs
        keep = alive & (val != 0)
        out[x[keep], c, bi[keep], di[keep]] = val[keep]
    return out
