"""Numerical certification of the integrability identities.

Every check draws its samples from ``numpy.random.default_rng(seed)`` and
returns a :class:`CheckReport`; the same seed reproduces the same report.
Residuals are scaled by the largest weight magnitude seen so tolerances do
not depend on the normalization of a family.

Non-compact providers are handled through their ``sector_cap``: the local
space is truncated to ``sector_cap + 1`` states and identities are compared
on the subspace of total charge ``<= sector_cap``, which the charge-conserving
weights never leave.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .aba import transfer
from .common import Lattice
from .provider import WeightProvider
from .tensor import DIM_CAP, DimensionError, braid_residual, permutation

YBE_TOL = 1e-10
UNITARITY_TOL = 1e-12
BRAID_TOL = 1e-10
COMMUTE_TOL = 1e-10
MAX_RETRIES = 10
POLE_REJECT = 1e-6
NONADD_RANGE = 0.9


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    worst_case_inputs: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        if self.passed != (self.max_residual <= self.tolerance):
            raise ValueError("passed must equal max_residual <= tolerance")

    def to_dict(self) -> dict:
        return {
            "check": self.check_name,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_case": self.worst_case_inputs,
            "seed": self.seed,
        }


def _report(name, results, tol, seed) -> CheckReport:
    """Reduce ``(residual, inputs)`` pairs by max."""
    results = list(results)
    if not results:
        raise ValueError(f"{name}: no samples evaluated")
    worst = max(results, key=lambda r: r[0])
    res = float(worst[0])
    return CheckReport(name, len(results), res, tol, bool(res <= tol), worst[1], seed)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# -- sampling --------------------------------------------------------------


def _draw(rng: np.random.Generator, nonadditive: bool) -> complex:
    if nonadditive:
        return complex(rng.uniform(-NONADD_RANGE, NONADD_RANGE))
    return complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8))


def _sample_points(rng, count: int, arity: int, nonadditive: bool) -> list[tuple[complex, ...]]:
    """Spectral tuples drawn up front so worker order cannot change the stream."""
    return [tuple(_draw(rng, nonadditive) for _ in range(arity)) for _ in range(count * (MAX_RETRIES + 1))]


def _evaluate(fn, pts, count: int):
    """Evaluate ``fn`` on ``count`` tuples, rejecting pole-adjacent ones (up to 10 retries each)."""
    out = []
    it = iter(pts)
    for _ in range(count):
        for attempt in range(MAX_RETRIES + 1):
            p = next(it)
            try:
                out.append(fn(p))
                break
            except (ZeroDivisionError, OverflowError):
                if attempt == MAX_RETRIES:
                    raise
    return out


# -- local spaces ----------------------------------------------------------


def local_dim(provider: WeightProvider) -> int:
    if provider.compact:
        return provider.local_dim
    if provider.sector_cap is None:
        raise ValueError("non-compact provider needs a sector_cap for identity checks")
    return provider.sector_cap + 1


def _charge_mask(d: int, sites: int, cap: Optional[int]) -> np.ndarray:
    dig = np.array(np.unravel_index(np.arange(d**sites), (d,) * sites)).sum(axis=0)
    return np.ones(d**sites, bool) if cap is None else dig <= cap


def _cap(provider: WeightProvider) -> Optional[int]:
    return None if provider.compact else provider.sector_cap


def r_matrix(provider: WeightProvider, lam, mu) -> np.ndarray:
    """R on the (possibly truncated) two-site space, rows (a, b), columns (c, d)."""
    d = local_dim(provider)
    if provider.compact:
        return provider.matrix(lam, mu)
    return provider.site(lam, mu, d, d).reshape(d * d, d * d)


def _scale(*mats: np.ndarray) -> float:
    return max(max(float(np.abs(m).max()) for m in mats), 1e-300)


def embed3(R: np.ndarray, d: int, i: int, j: int) -> np.ndarray:
    """Two-site operator acting on sites ``i < j`` of a three-site chain."""
    R4 = R.reshape(d, d, d, d)
    I = np.eye(d)
    if (i, j) == (0, 1):
        return np.kron(R, I)
    if (i, j) == (1, 2):
        return np.kron(I, R)
    if (i, j) == (0, 2):
        return np.einsum("acbd,ef->aecbfd", R4, I).reshape(d**3, d**3)
    raise ValueError("sites must be (0, 1), (1, 2) or (0, 2)")


# -- checks ----------------------------------------------------------------


def check_ice(provider: WeightProvider, samples: int = 5, seed: int = 0) -> CheckReport:
    """Largest weight violating a + b = c + d; exactly zero for a U(1)-invariant model."""
    d = local_dim(provider)
    rng = np.random.default_rng(seed)
    pts = _sample_points(rng, samples, 2, not provider.additive)
    bad = [(a, b, c, e) for a, b, c, e in itertools.product(range(d), repeat=4) if a + b != c + e]

    def one(p):
        t = provider.site(p[0], p[1], d, d) if not provider.compact else provider.tensor(*p)
        vals = np.array([abs(t[i]) for i in bad]) if bad else np.zeros(1)
        k = int(np.argmax(vals))
        where = [int(x) + 1 for x in bad[k]] if bad else []
        return float(vals[k]), {"lam": p[0], "mu": p[1], "index": where}

    return _report("ice", _evaluate(one, pts, samples), 0.0, seed)


def check_ybe(
    provider: WeightProvider,
    samples: int = 20,
    non_additive: Optional[bool] = None,
    seed: int = 0,
    tol: float = YBE_TOL,
    workers: int = 1,
) -> CheckReport:
    """R12(l1,l2) R13(l1,l3) R23(l2,l3) = R23(l2,l3) R13(l1,l3) R12(l1,l2)."""
    non_additive = (not provider.additive) if non_additive is None else non_additive
    d = local_dim(provider)
    if d**3 > DIM_CAP:
        raise DimensionError(f"three-site dimension {d**3} exceeds cap {DIM_CAP}")
    mask = _charge_mask(d, 3, _cap(provider))
    rng = np.random.default_rng(seed)
    pts = _sample_points(rng, samples, 3, non_additive)

    def one(p):
        l1, l2, l3 = p
        a, b, c = r_matrix(provider, l1, l2), r_matrix(provider, l1, l3), r_matrix(provider, l2, l3)
        R12, R13, R23 = embed3(a, d, 0, 1), embed3(b, d, 0, 2), embed3(c, d, 1, 2)
        diff = (R12 @ R13 @ R23 - R23 @ R13 @ R12)[np.ix_(mask, mask)]
        return float(np.abs(diff).max() / _scale(a, b, c) ** 3), {"lams": [l1, l2, l3]}

    chunks = _map(lambda ps: _evaluate(one, ps, 1), _chunks(pts, samples), workers)
    return _report("ybe-nonadditive" if non_additive else "ybe", [r for c in chunks for r in c], tol, seed)


def _chunks(pts, count):
    k = MAX_RETRIES + 1
    return [pts[i * k : (i + 1) * k] for i in range(count)]


def check_unitarity(
    provider: WeightProvider,
    samples: int = 20,
    seed: int = 0,
    tol: float = UNITARITY_TOL,
    workers: int = 1,
    projective: Optional[bool] = None,
) -> CheckReport:
    """Rhat(lam, mu) Rhat(mu, lam) = I with Rhat = P R.

    With ``projective`` (the default for non-additive providers, whose tables
    are not normalized) the product only has to equal rho * I and the residual
    is measured relative to rho.
    """
    projective = (not provider.additive) if projective is None else projective
    d = local_dim(provider)
    P = permutation(d)
    mask = _charge_mask(d, 2, _cap(provider))
    rng = np.random.default_rng(seed)
    pts = _sample_points(rng, samples, 2, not provider.additive)

    def one(p):
        lam, mu = p
        M = (P @ r_matrix(provider, lam, mu) @ P @ r_matrix(provider, mu, lam))[np.ix_(mask, mask)]
        rho = complex(np.trace(M)) / M.shape[0] if projective else 1.0
        res = float(np.abs(M - rho * np.eye(M.shape[0])).max() / abs(rho))
        return res, {"lam": lam, "mu": mu, "rho": rho}

    chunks = _map(lambda ps: _evaluate(one, ps, 1), _chunks(pts, samples), workers)
    return _report("unitarity-projective" if projective else "unitarity", [r for c in chunks for r in c], tol, seed)


def check_braid(S: np.ndarray, N: Optional[int] = None, tol: float = BRAID_TOL) -> CheckReport:
    """Constant braid relation (S x 1)(1 x S)(S x 1) = (1 x S)(S x 1)(1 x S)."""
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("braid must be a square matrix")
    N = int(round(np.sqrt(S.shape[0]))) if N is None else N
    if N * N != S.shape[0]:
        raise ValueError(f"braid of size {S.shape[0]} is not N^2 x N^2")
    res = braid_residual(S, N)
    return CheckReport("braid", 1, res, tol, bool(res <= tol), {"N": N})


def check_colored_braid(
    family: Callable[[complex, complex], np.ndarray],
    N: int,
    colors: Sequence[Sequence[complex]] = (),
    samples: int = 10,
    seed: int = 0,
    tol: float = BRAID_TOL,
) -> CheckReport:
    """S23(g1,g2) S12(g1,g3) S23(g2,g3) = S12(g2,g3) S23(g1,g3) S12(g1,g2).

    With S = P R this is the Yang-Baxter equation for R in braid form.

    ``colors`` lists explicit triples; otherwise ``samples`` real triples are
    drawn from (-0.9, 0.9).
    """
    rng = np.random.default_rng(seed)
    triples = [tuple(complex(x) for x in t) for t in colors] or _sample_points(rng, samples, 3, True)
    I = np.eye(N)

    def one(t):
        g1, g2, g3 = t
        a, b, c = family(g1, g2), family(g1, g3), family(g2, g3)
        lhs = np.kron(I, a) @ np.kron(b, I) @ np.kron(I, c)
        rhs = np.kron(c, I) @ np.kron(I, b) @ np.kron(a, I)
        return float(np.abs(lhs - rhs).max() / _scale(a, b, c) ** 3), {"colors": list(t)}

    results = [one(t) for t in triples] if colors else _evaluate(one, triples, samples)
    return _report("colored-braid", results, tol, seed)


def check_transfer_commute(
    provider: WeightProvider,
    lattice: Lattice,
    samples: int = 5,
    seed: int = 0,
    tol: float = COMMUTE_TOL,
) -> CheckReport:
    """max ||[T(lam), T(mu)]|| / (||T(lam)|| ||T(mu)||) with Frobenius norms."""
    if not provider.compact:
        raise ValueError("transfer commutativity needs a compact provider (finite auxiliary trace)")
    rng = np.random.default_rng(seed)
    pts = _sample_points(rng, samples, 2, not provider.additive)

    def one(p):
        A = transfer(provider, lattice, p[0]).matrix
        B = transfer(provider, lattice, p[1]).matrix
        res = np.linalg.norm(A @ B - B @ A) / max(np.linalg.norm(A) * np.linalg.norm(B), 1e-300)
        return float(res), {"lam": p[0], "mu": p[1]}

    return _report("transfer-commute", _evaluate(one, pts, samples), tol, seed)


def identity_suite(
    provider: WeightProvider, lattice: Optional[Lattice] = None, samples: int = 10, seed: int = 0
) -> list[CheckReport]:
    """Ice, YBE, unitarity and, for compact providers with a lattice, transfer commutativity."""
    out = [
        check_ice(provider, samples=min(samples, 5), seed=seed),
        check_ybe(provider, samples=samples, seed=seed),
        check_unitarity(provider, samples=samples, seed=seed),
    ]
    if lattice is not None and provider.compact:
        out.append(check_transfer_commute(provider, lattice, samples=min(samples, 5), seed=seed))
    return out
