"""Dense complex linear algebra used by every model module.

Indices in public signatures are 1-based (``a, b = 1..N``); arrays are
ordinary 0-based ``numpy`` arrays underneath.
"""
from __future__ import annotations

import threading
from typing import Sequence

import numpy as np

#: Largest matrix dimension any routine here will build.
DIM_CAP = 20_000

EXACT_TOL = 1e-12
EIG_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when a requested dense object exceeds :data:`DIM_CAP`."""


class EigenError(RuntimeError):
    """Eigen-decomposition did not reach the requested residual."""

    def __init__(self, residual: float, tol: float):
        super().__init__(f"eigen residual {residual:.3e} exceeds tolerance {tol:.1e}")
        self.residual = residual


def check_finite(x, what: str = "value"):
    if not np.all(np.isfinite(x)):
        raise FloatingPointError(f"non-finite {what}")
    return x


def weyl(N: int, a: int, b: int) -> np.ndarray:
    """N x N Weyl unit e_{a,b}: a single 1 at row ``a``, column ``b``."""
    if not (1 <= a <= N and 1 <= b <= N):
        raise IndexError(f"weyl indices ({a}, {b}) out of range 1..{N}")
    m = np.zeros((N, N), dtype=complex)
    m[a - 1, b - 1] = 1.0
    return m


def kron(A: np.ndarray, B: np.ndarray, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product with the left factor as the slow index."""
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if max(rows, cols) > cap:
        raise DimensionError(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(A, B)


def kron_all(*factors: np.ndarray, cap: int = DIM_CAP) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f, cap=cap)
    return out


def permutation(N: int) -> np.ndarray:
    """The C^N (x) C^N swap P = sum_{a,b} e_{a,b} (x) e_{b,a}."""
    if N < 2:
        raise ValueError("permutation needs N >= 2")
    P = np.zeros((N * N, N * N), dtype=complex)
    for a in range(N):
        for b in range(N):
            P[a * N + b, b * N + a] = 1.0
    return P


def eig(A: np.ndarray, tol: float = EIG_TOL):
    """Eigenvalues and right eigenvectors (as columns) with a residual check.

    Raises :class:`EigenError` if any pair has
    ``||A v - lam v|| / ||A|| > tol``.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eig needs a square matrix")
    check_finite(A, "matrix entry")
    vals, vecs = np.linalg.eig(A)
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    scale = max(np.linalg.norm(A, 2), 1e-300)
    res = np.linalg.norm(A @ vecs - vecs * vals, axis=0).max(initial=0.0) / scale
    if res > tol:
        raise EigenError(float(res), tol)
    return vals, vecs


def spectral_projectors(
    A: np.ndarray,
    groups: Sequence[Sequence[int]],
    tol: float = 1e-8,
) -> list[np.ndarray]:
    """Projectors onto the eigenspaces named by ``groups`` of eigenvalue indices.

    ``groups`` partitions ``range(len(A))`` where the indices refer to the
    ordering returned by :func:`eig`.  Built from the eigenvector matrix V as
    ``V[:, g] @ inv(V)[g, :]``, so the projectors are complete and mutually
    orthogonal to rounding error even for non-normal ``A``.
    """
    vals, vecs = eig(A)
    seen = sorted(i for g in groups for i in g)
    if seen != list(range(len(vals))):
        raise ValueError("groups must partition the eigenvalue indices")
    for g in groups:
        for i in g:
            for j in g:
                if abs(vals[i] - vals[j]) > tol:
                    raise ValueError(
                        f"eigenvalues {vals[i]:.6g} and {vals[j]:.6g} in one group differ by more than {tol}"
                    )
    inv = np.linalg.inv(vecs)
    return [vecs[:, list(g)] @ inv[list(g), :] for g in groups]


def group_by_targets(vals: np.ndarray, targets: Sequence[complex], tol: float = 1e-8):
    """Assign each eigenvalue to the nearest target; return index groups in target order."""
    groups: list[list[int]] = [[] for _ in targets]
    t = np.asarray(targets, dtype=complex)
    for i, v in enumerate(vals):
        d = np.abs(t - v)
        k = int(np.argmin(d))
        if d[k] > tol:
            raise ValueError(f"eigenvalue {v:.6g} matches no target within {tol}")
        groups[k].append(i)
    return groups


def lagrange_projector(S: np.ndarray, roots: Sequence[complex], j: int) -> np.ndarray:
    """prod_{k != j} (S - r_k) / (r_j - r_k): projector of a diagonalisable S with spectrum ``roots``."""
    dim = S.shape[0]
    I = np.eye(dim, dtype=complex)
    out = I.copy()
    for k, rk in enumerate(roots):
        if k == j:
            continue
        den = roots[j] - rk
        if abs(den) < 1e-12:
            raise ZeroDivisionError(f"degenerate interpolation pair ({j}, {k})")
        out = out @ (S - rk * I) / den
    return out


def charge_blocks(N: int) -> list[np.ndarray]:
    """Two-site basis indices grouped by charge (a-1)+(b-1), charge 0 first."""
    ch = np.add.outer(np.arange(N), np.arange(N)).ravel()
    return [np.flatnonzero(ch == n) for n in range(2 * N - 1)]


def block_lagrange_projectors(S: np.ndarray, N: int, roots_of_block) -> list[np.ndarray]:
    """Projectors of a charge-conserving two-site S, interpolated block by block.

    ``roots_of_block(n, m)`` returns ``(labels, roots)`` for the eigenvalues
    present in the charge-n block of size m.  Interpolating inside each block
    uses only the roots that occur there, which keeps the products short and
    well conditioned.  Returns one projector per global label ``0..K-1``.
    """
    dim = N * N
    out: dict[int, np.ndarray] = {}
    for n, idx in enumerate(charge_blocks(N)):
        blk = S[np.ix_(idx, idx)]
        labels, roots = roots_of_block(n, len(idx))
        for pos, lab in enumerate(labels):
            P = out.setdefault(lab, np.zeros((dim, dim), dtype=complex))
            P[np.ix_(idx, idx)] = lagrange_projector(blk, roots, pos)
    return [out[k] for k in sorted(out)]


def block_projectors_by_targets(S: np.ndarray, N: int, targets: Sequence[complex], tol: float = 1e-8) -> list[np.ndarray]:
    """Projectors onto the eigenspaces of analytic eigenvalues ``targets``.

    Each charge block's numerical spectrum is matched to the nearest target
    within ``tol``; the projector is then interpolated inside the block over
    the analytic values of the targets that occur there.
    """
    t = list(targets)

    def roots_of_block(n, m):
        blk_idx = charge_blocks(N)[n]
        vals = np.linalg.eigvals(S[np.ix_(blk_idx, blk_idx)])
        groups = group_by_targets(vals, t, tol)
        labels = [k for k, g in enumerate(groups) if g]
        return labels, [t[k] for k in labels]

    found = block_lagrange_projectors(S, N, roots_of_block)
    # pad labels that never occur with zero projectors
    dim = N * N
    present = set()
    for n in range(2 * N - 1):
        present.update(roots_of_block(n, 0)[0])
    out, it = [], iter(found)
    for k in range(len(t)):
        out.append(next(it) if k in present else np.zeros((dim, dim), dtype=complex))
    return out


# mpmath precision is process global; extended precision builds hold this lock
MP_LOCK = threading.RLock()


def mp_block_projectors(entry, N: int, roots_of_block, dps: int = 40) -> list[np.ndarray]:
    """Blockwise Lagrange projectors evaluated in extended precision.

    ``entry(r, c)`` returns the two-site braid element (flat indices) as an
    mpmath number; ``roots_of_block(n, m)`` returns ``(labels, roots)`` with
    mpmath roots.  When the spectrum spans several decades double precision
    interpolation loses digits; here the products run at ``dps`` digits and
    are rounded once.  Labels that never occur get zero projectors.
    """
    import mpmath

    dim = N * N
    out: dict[int, np.ndarray] = {}
    with MP_LOCK, mpmath.workdps(dps):
        for n, idx in enumerate(charge_blocks(N)):
            m = len(idx)
            blk = mpmath.matrix([[entry(int(r), int(c)) for c in idx] for r in idx])
            labels, roots = roots_of_block(n, m)
            eye = mpmath.eye(m)
            for pos, lab in enumerate(labels):
                P = eye
                for k, rk in enumerate(roots):
                    if k != pos:
                        den = roots[pos] - rk
                        if abs(den) < 1e-12:
                            raise ZeroDivisionError(f"degenerate interpolation pair ({pos}, {k})")
                        P = P * (blk - rk * eye) / den
                full = out.setdefault(lab, np.zeros((dim, dim), dtype=complex))
                full[np.ix_(idx, idx)] = np.array(P.tolist(), dtype=complex)
    K = max(out) + 1 if out else 0
    return [out.get(k, np.zeros((dim, dim), dtype=complex)) for k in range(K)]


def braid_residual(S: np.ndarray, N: int) -> float:
    """max |(S x I)(I x S)(S x I) - (I x S)(S x I)(I x S)| scaled by max |S|^3."""
    I = np.eye(N, dtype=complex)
    A = np.kron(S, I)
    B = np.kron(I, S)
    scale = max(np.abs(S).max(), 1e-300) ** 3
    return float(np.abs(A @ B @ A - B @ A @ B).max() / scale)


def embed(op: np.ndarray, N: int, i: int, j: int, n: int = 3) -> np.ndarray:
    """Lift a two-site operator on sites ``(i, j)`` (0-based, i != j) to ``n`` sites."""
    op4 = op.reshape(N, N, N, N)
    dim = N**n
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.array(np.unravel_index(np.arange(dim), (N,) * n)).T
    for col, cfg in enumerate(idx):
        x, y = cfg[i], cfg[j]
        for xo in range(N):
            for yo in range(N):
                v = op4[xo, yo, x, y]
                if v == 0:
                    continue
                new = cfg.copy()
                new[i] = xo
                new[j] = yo
                out[np.ravel_multi_index(tuple(new), (N,) * n), col] += v
    return out
