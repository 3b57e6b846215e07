"""Colored vertex models with non-additive R-matrices, R(lam, mu) = P S(lam, mu).

Explicit weight tables exist for N = 2, 3, 4.  The admissible omega values are
the primitive roots exp(2 pi i k / N), so a model is fixed by (N, k).  The
on-shell formulas (eigenvalue, Bethe equations, theta, F amplitudes) accept
any N; beyond N = 4 there is no table to check them against.
"""
from __future__ import annotations

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .common import Lattice, POLE_TOL, as_roots, check_distinct, clog, csqrt, guard, log_residual
from .provider import WeightProvider

TABLE_MAX_N = 4


class FormulaOnlyWarning(UserWarning):
    """Result comes from a general-N formula with no weight table behind it."""


class DomainError(ValueError):
    """Spectral parameter outside the real interval (-1, 1) without the complex flag."""


def omega_choices(N: int) -> list[int]:
    """The admissible k (omega = exp(2 pi i k / N)) for a given N."""
    return [k for k in range(1, N) if math.gcd(k, N) == 1]


@dataclass(frozen=True)
class NonAddSpec:
    """Non-additive colored model: N states, omega = exp(2 pi i k / N).

    For N = 3 the two choices k = 1, 2 are exp(2 pi i / 3) and -exp(pi i / 3);
    for N = 4, k = 1, 3 give +i and -i.  ``allow_complex`` lifts the default
    restriction of spectral parameters to (-1, 1).
    """

    N: int
    k: int = 1
    allow_complex: bool = False

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise ValueError("non-additive model needs integer N >= 2")
        if self.k not in omega_choices(self.N):
            raise ValueError(f"k={self.k} is not an admissible omega choice for N={self.N}: {omega_choices(self.N)}")
        if self.N > TABLE_MAX_N:
            warnings.warn(
                f"N={self.N}: formula-only, not table-verified", FormulaOnlyWarning, stacklevel=2
            )

    @property
    def omega(self) -> complex:
        return cmath.exp(2j * math.pi * self.k / self.N)

    @property
    def table_verified(self) -> bool:
        return self.N <= TABLE_MAX_N

    def check_arg(self, x) -> complex:
        x = complex(x)
        if not self.allow_complex and (x.imag != 0 or not -1 < x.real < 1):
            raise DomainError(f"spectral parameter {x} outside (-1, 1); pass allow_complex=True")
        return x


s = csqrt


def sp(*factors) -> complex:
    """Product of principal square roots, one per factor.

    Each factor depends on a single spectral variable (or none), so every
    weight is a fixed single-valued function of lam and of mu separately.
    A principal root of the whole product would flip sign between entries
    once the arguments leave (-1, 1) and break the Yang-Baxter equation.
    """
    out = 1 + 0j
    for f in factors:
        out *= csqrt(f)
    return out


def _table2(l, m, w):
    R11 = lambda: 1 - l * m
    R12 = lambda: l - m
    X = lambda: sp(1 - l**2, 1 - m**2)
    return {
        (1, 1, 1, 1): R11, (2, 2, 2, 2): R11,
        (1, 2, 1, 2): R12, (2, 1, 2, 1): lambda: -R12(),
        (1, 2, 2, 1): X, (2, 1, 1, 2): X,
    }


def _table3(l, m, w):
    R11 = lambda: (1 - m * l) * (1 - m * l * w)
    R12 = lambda: (l - m) * (1 - m * l * w)
    R12x = lambda: (1 - m * l * w) * sp(1 - m**2, 1 - l**2)
    R13 = lambda: (l - m) * (l - m * w)
    R13_22 = lambda: (l - m) * sp(1 - l**2, 1 - m**2 * w, 1 + w)
    R13_31 = lambda: sp(1 - l**2, 1 - l**2 * w, 1 - m**2, 1 - m**2 * w)
    R22 = lambda: (1 - l**2) * (1 - m**2 * w) - (m - l) * (m - l * w)
    R22_31 = lambda: (m - l) * sp(1 - m**2, 1 - l**2 * w, 1 + w)
    R23 = lambda: (1 + w) * (l - m) * (1 - m * l)
    R23x = lambda: (1 - m * l) * sp(1 - m**2 * w, 1 - l**2 * w)
    R31 = lambda: (m - l) * (m - l * w)
    return {
        (1, 1, 1, 1): R11, (3, 3, 3, 3): R11,
        (1, 2, 1, 2): R12, (2, 1, 2, 1): lambda: -R12(),
        (1, 2, 2, 1): R12x, (2, 1, 1, 2): R12x,
        (1, 3, 1, 3): R13,
        (1, 3, 2, 2): R13_22, (2, 2, 1, 3): R13_22,
        (1, 3, 3, 1): R13_31, (3, 1, 1, 3): R13_31,
        (2, 2, 2, 2): R22,
        (2, 2, 3, 1): R22_31, (3, 1, 2, 2): R22_31,
        (2, 3, 2, 3): R23, (3, 2, 3, 2): lambda: -R23(),
        (2, 3, 3, 2): R23x, (3, 2, 2, 3): R23x,
        (3, 1, 3, 1): R31,
    }


def _table4(l, m, w):
    w2 = w * w
    c2 = 1 + w
    c3 = 1 + w + w2
    R11 = lambda: (1 - m * l) * (1 - m * l * w) * (1 - m * l * w2)
    R12 = lambda: (l - m) * (1 - m * l * w) * (1 - m * l * w2)
    R12x = lambda: sp(1 - m**2, 1 - l**2) * (1 - m * l * w) * (1 - m * l * w2)
    R13 = lambda: (l - m) * (l - m * w) * (1 - m * l * w2)
    R13_22 = lambda: sp(1 - l**2, 1 - m**2 * w, c2) * (l - m) * (1 - m * l * w2)
    R13_31 = lambda: sp(1 - l**2, 1 - l**2 * w, 1 - m**2, 1 - m**2 * w) * (1 - m * l * w2)
    R22 = lambda: ((1 - l**2) * (1 - m**2 * w) - (m - l) * (m - l * w)) * (1 - m * l * w2)
    R22_31 = lambda: (m - l) * sp(1 - m**2, 1 - l**2 * w, c2) * (1 - m * l * w2)
    R23 = lambda: (l - m) * ((1 - m**2 * l**2) * (1 - w**3) - w * (l - m * w) * (l - m))
    R23_32 = lambda: sp(1 - m**2 * w, 1 - l**2 * w) * ((1 - m**2) * (1 - l**2 * w2) - c2 * (l - m * w) * (l - m))
    R31 = lambda: (m - l) * (m - l * w) * (1 - l * m * w2)
    R14_41 = lambda: sp(1 - l**2, 1 - l**2 * w, 1 - l**2 * w2) * sp(1 - m**2, 1 - m**2 * w, 1 - m**2 * w2)
    R14_32 = lambda: sp(1 - l**2, 1 - l**2 * w) * sp(1 - m**2 * w, 1 - m**2 * w2) * s(c3) * (l - m)
    R14_23 = lambda: sp(1 - l**2, 1 - m**2 * w2) * s(c3) * (l - m) * (l - m * w)
    R14 = lambda: (l - m) * (l - m * w) * (l - m * w2)
    R23_41 = lambda: sp(1 - l**2 * w, 1 - l**2 * w2) * sp(1 - m**2, 1 - m**2 * w) * s(c3) * (m - l)
    R24_42 = lambda: sp(1 - l**2 * w, 1 - l**2 * w2) * sp(1 - m**2 * w, 1 - m**2 * w2) * (1 - m * l)
    R24_33 = lambda: sp(1 - l**2 * w, 1 - m**2 * w2) * sp(c2, c3) * (1 - l * m) * (l - m)
    R24 = lambda: c3 * (1 - l * m) * (l - m) * (l - m * w)
    R32 = lambda: ((1 - l**2 * m**2) * c2 - w * (m - l) * (m - l * w)) * (m - l)
    R32_23 = lambda: ((1 - l**2) * (1 - m**2 * w2) - c2 * (m - l) * (m - l * w)) * sp(1 - l**2 * w, 1 - m**2 * w)
    R32_41 = lambda: sp(1 - w2 * l**2, 1 - m**2) * s(c3) * (m - l) * (m - l * w)
    R33_42 = lambda: sp(1 - l**2 * w2, 1 - m**2 * w) * sp(c2, c3) * (1 - l * m) * (m - l)
    R33 = lambda: ((1 - l**2 * w) * (1 - m**2 * w2) - c3 * (m - l) * (m - l * w)) * (1 - l * m)
    R34_43 = lambda: sp(1 - l**2 * w2, 1 - m**2 * w2) * (1 - l * m) * (1 - l * m * w)
    R34 = lambda: c3 * (1 - l * m) * (1 - l * m * w) * (l - m)
    R41 = lambda: (m - l) * (m - l * w) * (m - l * w2)
    R42 = lambda: c3 * (1 - l * m) * (m - l) * (m - l * w)
    return {
        (1, 1, 1, 1): R11, (4, 4, 4, 4): R11,
        (1, 2, 1, 2): R12, (2, 1, 2, 1): lambda: -R12(),
        (1, 2, 2, 1): R12x, (2, 1, 1, 2): R12x,
        (1, 3, 1, 3): R13,
        (1, 3, 2, 2): R13_22, (2, 2, 1, 3): R13_22,
        (1, 3, 3, 1): R13_31, (3, 1, 1, 3): R13_31,
        (1, 4, 4, 1): R14_41, (4, 1, 1, 4): R14_41,
        (1, 4, 3, 2): R14_32, (3, 2, 1, 4): R14_32,
        (1, 4, 2, 3): R14_23, (2, 3, 1, 4): R14_23,
        (1, 4, 1, 4): R14,
        (2, 2, 3, 1): R22_31, (3, 1, 2, 2): R22_31,
        (2, 2, 2, 2): R22,
        (2, 3, 2, 3): R23,
        (2, 3, 3, 2): R23_32,
        (3, 2, 2, 3): R32_23,
        (3, 2, 3, 2): R32,
        (3, 1, 3, 1): R31,
        (3, 3, 3, 3): R33,
        (4, 1, 4, 1): R41,
        (4, 2, 4, 2): R42,
        (2, 4, 2, 4): R24,
        (2, 3, 4, 1): R23_41, (4, 1, 2, 3): R23_41,
        (2, 4, 3, 3): R24_33, (3, 3, 2, 4): R24_33,
        (2, 4, 4, 2): R24_42, (4, 2, 2, 4): R24_42,
        (3, 2, 4, 1): R32_41, (4, 1, 3, 2): R32_41,
        (3, 3, 4, 2): R33_42, (4, 2, 3, 3): R33_42,
        (3, 4, 4, 3): R34_43, (4, 3, 3, 4): R34_43,
        (3, 4, 3, 4): R34, (4, 3, 4, 3): lambda: -R34(),
    }


_TABLES = {2: _table2, 3: _table3, 4: _table4}


def weight_table(spec: NonAddSpec, lam, mu) -> dict:
    """The (a, b, c, d) -> zero-argument callable table at (lam, mu)."""
    if not spec.table_verified:
        raise NotImplementedError(f"no weight table for N={spec.N} (formula-only)")
    return _TABLES[spec.N](spec.check_arg(lam), spec.check_arg(mu), spec.omega)


def r_weight_nonadd(spec: NonAddSpec, lam, mu, a: int, b: int, c: int, d: int) -> complex:
    for i in (a, b, c, d):
        if not 1 <= i <= spec.N:
            raise IndexError(f"weight index {i} out of range 1..{spec.N}")
    f = weight_table(spec, lam, mu).get((a, b, c, d))
    return 0j if f is None else complex(f())


def r_tensor_nonadd(spec: NonAddSpec, lam, mu) -> np.ndarray:
    N = spec.N
    t = np.zeros((N, N, N, N), dtype=complex)
    for (a, b, c, d), f in weight_table(spec, lam, mu).items():
        t[a - 1, b - 1, c - 1, d - 1] = f()
    return t


def r_matrix_nonadd(spec: NonAddSpec, lam, mu) -> np.ndarray:
    return r_tensor_nonadd(spec, lam, mu).reshape(spec.N**2, spec.N**2)


def diag_weight_nonadd(spec: NonAddSpec, lam, mu, a: int) -> complex:
    """R_{a,1}^{a,1} = prod_{i<a} (mu - lam w^{i-1}) prod_{i>=a}^{N-1} (1 - mu lam w^{i-1})."""
    if not 1 <= a <= spec.N:
        raise IndexError(f"index {a} out of range 1..{spec.N}")
    lam, mu, w = complex(lam), complex(mu), spec.omega
    out = 1 + 0j
    for i in range(1, a):
        out *= mu - lam * w ** (i - 1)
    for i in range(a, spec.N):
        out *= 1 - mu * lam * w ** (i - 1)
    return out


def theta_nonadd(spec: NonAddSpec, lam, mu, tol: float = POLE_TOL) -> complex:
    lam, mu, w = complex(lam), complex(mu), spec.omega
    return -(lam - mu * w) / guard(lam * w - mu, "non-additive theta", tol)


def lambda_eig_nonadd(spec: NonAddSpec, lattice: Lattice, roots, lam, tol: float = POLE_TOL) -> complex:
    rts = as_roots(roots)
    check_distinct(rts)
    lam, w = complex(lam), spec.omega
    total = 0j
    for a in range(1, spec.N + 1):
        term = 1 + 0j
        for mu in lattice.mus:
            term *= diag_weight_nonadd(spec, lam, mu, a)
        for lj in rts:
            term *= (1 - lam * lj) * (lam - lj * w) / guard(lam * w ** (a - 1) - lj, "non-additive Lambda", tol)
            term *= w ** (a - 2) / guard(lam * w ** (a - 2) - lj, "non-additive Lambda", tol)
        total += term
    return total


def bae_residual_nonadd(spec: NonAddSpec, lattice: Lattice, roots, log_form: bool = True) -> list[complex]:
    rts = as_roots(roots)
    check_distinct(rts)
    w = spec.omega
    out = []
    for l, ll in enumerate(rts):
        lhs = [(1 - ll * mu, guard(mu - ll, "non-additive BAE")) for mu in lattice.mus]
        rhs = [(ll - lj * w, guard(ll * w - lj, "non-additive BAE")) for j, lj in enumerate(rts) if j != l]
        if log_form:
            out.append(log_residual([clog(n) - clog(d) for n, d in lhs], [clog(n) - clog(d) for n, d in rhs]))
        else:
            out.append(complex(np.prod([n / d for n, d in lhs]) - np.prod([n / d for n, d in rhs])))
    return out


def f01_nonadd(spec: NonAddSpec, a: int, lam, mu, tol: float = POLE_TOL) -> complex:
    lam, mu, w = complex(lam), complex(mu), spec.omega
    num = sp(1 - w**a, 1 - w ** (a - 1) * lam**2, 1 - mu**2)
    return num / (s(1 - w) * guard(mu - w ** (a - 1) * lam, "non-additive F01", tol))


def f_closed_nonadd(spec: NonAddSpec, c: int, b: int, a: int, lam, rapidities, tol: float = POLE_TOL) -> complex:
    N, w = spec.N, spec.omega
    rap = [complex(r) for r in rapidities]
    lam = complex(lam)
    if len(rap) != b:
        raise ValueError(f"need {b} rapidities, got {len(rap)}")
    if not 1 <= b <= N - 1 or not 1 <= a <= N - b:
        raise ValueError(f"(b, a) = ({b}, {a}) outside 1 <= b <= N-1, 1 <= a <= N-b")
    if c not in (0, b):
        raise ValueError("closed forms exist only for c = 0 and c = b")
    pair = 1 + 0j
    for i, j in itertools.combinations(range(b), 2):
        pair *= (1 - rap[i] * rap[j]) / guard(w * rap[i] - rap[j], "non-additive F pair", tol)
    ladder = 1 + 0j
    if c == 0:
        for i in range(1, b):
            ladder *= sp((1 - w ** (a + b - 1 - i)) / (1 - w ** (a + b - 1)), (1 - lam**2 * w ** (a + i - 2)) / (1 - lam**2 * w ** (a + b - 2)))
        single = np.prod([f01_nonadd(spec, a + b - 1, lam, r, tol) for r in rap])
        return complex(w ** (b * (b - 1) // 2) * pair * ladder * single)
    for i in range(1, b):
        ladder *= sp((1 - w ** (a + b - i)) / (1 - w**a), (1 - lam**2 * w ** (a + i - 1)) / (1 - lam**2 * w ** (a - 1)))
    single = np.prod([-f01_nonadd(spec, a, lam, r, tol) for r in rap])
    return complex(pair * ladder * single)


def provider(spec: NonAddSpec) -> WeightProvider:
    return WeightProvider(
        name=f"nonadditive-N{spec.N}-k{spec.k}",
        local_dim=spec.N,
        tensor_fn=lambda lam, mu: r_tensor_nonadd(spec, lam, mu),
        theta_closed=lambda lam, mu: theta_nonadd(spec, lam, mu),
        additive=False,
        params={"family": "nonadditive", "N": spec.N, "k": spec.k, "period": None},
    )
