"""Non-compact SL(2,R) vertex model on the discrete series D^-_s, s < 0.

Weights are organized by U(1) sector n: the sector-n block is the
(n+1) x (n+1) matrix ``R_{a, n+2-a}^{c, n+2-c}``.  Sectors n <= 4 come from
the tabulated amplitudes.  Higher sectors, needed once the auxiliary trace
runs over many states, are built from the two-site Casimir of D^-_s in an
orthonormal basis and then gauge-aligned to the tables (see
:func:`casimir_block`).
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .common import Lattice, POLE_TOL, as_roots, check_distinct, clog, csqrt, guard, log_residual
from .provider import WeightProvider

TABLE_SECTOR_CAP = 4
HAM_SECTOR_CAP = 3
HAM_DIM_CAP = 4096


class SectorError(ValueError):
    """Requested sector lies beyond what the tables cover."""


@dataclass(frozen=True)
class Sl2rSpec:
    s: float
    sector_cap: int = TABLE_SECTOR_CAP

    def __post_init__(self):
        s = float(self.s)
        if not math.isfinite(s) or s >= 0:
            raise ValueError("SL(2,R) spin must be a finite negative real")
        object.__setattr__(self, "s", s)
        for k in range(1, self.sector_cap + 2):
            if abs(2 * s + 1 - k) < POLE_TOL:
                raise ValueError(f"2s+1-{k} vanishes")


def p_func(spec: Sl2rSpec, i: int, lam, mu) -> complex:
    """p_i = prod_{j=1}^{i-1} [2s + 1 + i(mu - lam) - j]."""
    if i < 1:
        raise ValueError("p_i needs i >= 1")
    x = 1j * (complex(mu) - complex(lam))
    out = 1 + 0j
    for j in range(1, i):
        out *= 2 * spec.s + 1 + x - j
    return out


def _table(spec: Sl2rSpec, lam, mu) -> dict:
    s = spec.s
    u = complex(mu) - complex(lam)
    I = 1j
    sq = csqrt
    p2 = lambda: p_func(spec, 2, lam, mu)
    p3 = lambda: p_func(spec, 3, lam, mu)
    p4 = lambda: p_func(spec, 4, lam, mu)
    p5 = lambda: p_func(spec, 5, lam, mu)

    n1_d = lambda: I * u / p2()
    n1_x = lambda: 2 * s / p2()

    n2_13 = lambda: -u * (I + u) / p3()
    n2_22x = lambda: 2 * sq(I * s) * sq(I * (2 * s - 1)) * u / p3()
    n2_31x = lambda: 2 * s * (2 * s - 1) / p3()
    n2_22 = lambda: (2 * s * (2 * s - 1) - u * (-I + u)) / p3()

    n3_14 = lambda: (2 - I * u) * u * (I + u) / p4()
    n3_23x = lambda: 2 * I * sq(3) * sq(I * (-1 + s)) * sq(I * s) * u * (I + u) / p4()
    # printed with sqrt(i(1-s)); that branch breaks unitarity by a factor i, the
    # sibling entry's sqrt(i(-1+s)) restores it
    n3_32x = lambda: 2 * sq(3) * sq(I * (-1 + s)) * sq(I * s) * (-1 + 2 * s) * u / p4()
    n3_41x = lambda: 4 * (-1 + s) * s * (-1 + 2 * s) / p4()
    n3_23 = lambda: -I * u * (-8 * (-1 + s) * s + u * (-I + u)) / p4()
    n3_32 = lambda: 2 * (-1 + 2 * s) * (2 * (-1 + s) * s - u * (-I + u)) / p4()

    n4_15 = lambda: u * (I + u) * (2 * I + u) * (3 * I + u) / p5()
    n4_24x = lambda: -2 * sq(2) * sq(I * s) * sq(I * (-3 + 2 * s)) * u * (I + u) * (2 * I + u) / p5()
    n4_33x = lambda: (
        2 * sq(6) * sq(I * (-1 + s)) * sq(I * s) * sq(I * (-3 + 2 * s)) * sq(I * (-1 + 2 * s)) * u * (I + u) / p5()
    )
    n4_42x = lambda: 4 * sq(2) * (-1 + s) * sq(I * s) * sq(I * (-3 + 2 * s)) * (-1 + 2 * s) * u / p5()
    n4_51x = lambda: 4 * (-1 + s) * s * (-3 + 2 * s) * (-1 + 2 * s) / p5()
    n4_24 = lambda: u * (I + u) * (6 * (3 - 2 * s) * s + u * (-I + u)) / p5()
    n4_24_33 = lambda: 2 * sq(3) * sq(I * (-1 + s)) * sq(I * (-1 + 2 * s)) * u * (2 * (-3 + 2 * s) * s - u * (-I + u)) / p5()
    n4_24_42 = lambda: 2 * (-1 + s) * (-1 + 2 * s) * (2 * (-3 + 2 * s) * s - 3 * u * (-I + u)) / p5()
    n4_33 = lambda: (
        4 * (-1 + s) * s * (-3 + 2 * s) * (-1 + 2 * s)
        + 2 * I * (3 + 4 * s * (-3 + 2 * s)) * u
        - (7 + 8 * s * (-3 + 2 * s)) * u**2
        - 2 * I * u**3
        + u**4
    ) / p5()

    return {
        (1, 1, 1, 1): lambda: 1 + 0j,
        (1, 2, 1, 2): n1_d, (2, 1, 2, 1): n1_d,
        (1, 2, 2, 1): n1_x, (2, 1, 1, 2): n1_x,
        (1, 3, 1, 3): n2_13, (3, 1, 3, 1): n2_13,
        (1, 3, 2, 2): n2_22x, (2, 2, 1, 3): n2_22x, (2, 2, 3, 1): n2_22x, (3, 1, 2, 2): n2_22x,
        (1, 3, 3, 1): n2_31x, (3, 1, 1, 3): n2_31x,
        (2, 2, 2, 2): n2_22,
        (1, 4, 1, 4): n3_14, (4, 1, 4, 1): n3_14,
        (1, 4, 2, 3): n3_23x, (2, 3, 1, 4): n3_23x, (3, 2, 4, 1): n3_23x, (4, 1, 3, 2): n3_23x,
        (1, 4, 3, 2): n3_32x, (2, 3, 4, 1): n3_32x, (3, 2, 1, 4): n3_32x, (4, 1, 2, 3): n3_32x,
        (1, 4, 4, 1): n3_41x, (4, 1, 1, 4): n3_41x,
        (2, 3, 2, 3): n3_23, (3, 2, 3, 2): n3_23,
        (2, 3, 3, 2): n3_32, (3, 2, 2, 3): n3_32,
        (1, 5, 1, 5): n4_15, (5, 1, 5, 1): n4_15,
        (1, 5, 2, 4): n4_24x, (2, 4, 1, 5): n4_24x, (4, 2, 5, 1): n4_24x, (5, 1, 4, 2): n4_24x,
        (1, 5, 3, 3): n4_33x, (3, 3, 1, 5): n4_33x, (3, 3, 5, 1): n4_33x, (5, 1, 3, 3): n4_33x,
        (1, 5, 4, 2): n4_42x, (2, 4, 5, 1): n4_42x, (4, 2, 1, 5): n4_42x, (5, 1, 2, 4): n4_42x,
        (1, 5, 5, 1): n4_51x, (5, 1, 1, 5): n4_51x,
        (2, 4, 2, 4): n4_24, (4, 2, 4, 2): n4_24,
        (2, 4, 3, 3): n4_24_33, (3, 3, 2, 4): n4_24_33, (4, 2, 3, 3): n4_24_33, (3, 3, 4, 2): n4_24_33,
        (2, 4, 4, 2): n4_24_42, (4, 2, 2, 4): n4_24_42,
        (3, 3, 3, 3): n4_33,
    }


def weight_table(spec: Sl2rSpec, lam, mu) -> dict:
    """Tabulated amplitudes for sectors n <= 4, keyed (a, b, c, d)."""
    return _table(spec, complex(lam), complex(mu))


def r_weight_sl2r(spec: Sl2rSpec, lam, mu, a: int, b: int, c: int, d: int, tol: float = POLE_TOL) -> complex:
    if min(a, b, c, d) < 1:
        raise IndexError("occupation indices start at 1")
    n = a + b - 2
    if c + d - 2 != n:
        return 0j
    if n > TABLE_SECTOR_CAP:
        raise SectorError(f"sector {n} beyond the tabulated n <= {TABLE_SECTOR_CAP}")
    guard(p_func(spec, n + 1, lam, mu), "SL(2,R) weight", tol)
    return complex(weight_table(spec, lam, mu)[(a, b, c, d)]())


def sector_block(spec: Sl2rSpec, n: int, lam, mu) -> np.ndarray:
    """(n+1) x (n+1) block R_{a,n+2-a}^{c,n+2-c} from the tables (n <= 4)."""
    if not 0 <= n <= TABLE_SECTOR_CAP:
        raise SectorError(f"sector {n} outside 0..{TABLE_SECTOR_CAP}")
    t = weight_table(spec, lam, mu)
    B = np.empty((n + 1, n + 1), dtype=complex)
    for a in range(1, n + 2):
        for c in range(1, n + 2):
            B[a - 1, c - 1] = t[(a, n + 2 - a, c, n + 2 - c)]()
    return B


# -- general sectors from the two-site Casimir ---------------------------------


def _lowering(kappa: float, n: int) -> np.ndarray:
    """Total K^- from sector n to n-1 in the orthonormal basis |m1, n - m1>."""
    K = np.zeros((n, n + 1))
    for m1 in range(n + 1):
        m2 = n - m1
        if m1 > 0:
            K[m1 - 1, m1] += math.sqrt(m1 * (m1 + 2 * kappa - 1))
        if m2 > 0:
            K[m1, m1] += math.sqrt(m2 * (m2 + 2 * kappa - 1))
    return K


@lru_cache(maxsize=512)
def _casimir_vectors(s: float, n: int) -> np.ndarray:
    """Columns: orthonormal eigenvectors of the sector-n Casimir, ordered j = 0..n."""
    kappa = -s
    K = _lowering(kappa, n)
    k0 = 2 * kappa + n
    C = (k0 * k0 - k0) * np.eye(n + 1) - K.T @ K
    vals, vecs = np.linalg.eigh(C)
    expected = [(2 * kappa + j) * (2 * kappa + j - 1) for j in range(n + 1)]
    if not np.allclose(vals, expected, rtol=1e-9, atol=1e-9):
        raise ArithmeticError(f"sector {n} Casimir spectrum off: {vals} vs {expected}")
    vecs.setflags(write=False)
    return vecs


def _channel_coeff(s: float, j: int, x: complex) -> complex:
    # prod_k (t_k i + x)/(t_k i - x) with t_k = k - 1 - 2s; t_k = k at s = -1/2
    out = 1 + 0j
    for k in range(1, j + 1):
        t = k - 1 - 2 * s
        out *= (t * 1j + x) / guard(t * 1j - x, "SL(2,R) channel coefficient")
    return out


def _raw_block(s: float, n: int, lam: complex, mu: complex) -> np.ndarray:
    V = _casimir_vectors(s, n)
    c = np.array([_channel_coeff(s, j, lam - mu) for j in range(n + 1)])
    Rc = (V * c) @ V.T
    return Rc[::-1, :]  # R = P Rcheck; P reverses |m1, m2> -> |m2, m1> inside a sector


@lru_cache(maxsize=64)
def _gauge(s: float, mmax: int) -> tuple[complex, ...]:
    """Basis rescalings g_1..g_mmax aligning the Casimir blocks with the tables.

    A diagonal change of local basis g multiplies R_{a,b}^{c,d} by
    g_a g_b / (g_c g_d).  It is fixed by demanding that
    R_{a+1,1}^{a,2} / R_{a+1,1}^{a+1,1} equal the closed-form 0F1^{(a)} for
    every a, up to the sign the tables carry relative to that closed form
    (table weights give -0F1 at every a); g_1 = g_2 = 1 uses the freedom
    g_m -> t^m.
    """
    spec = Sl2rSpec(s)
    lam, mu = 0.31 + 0.07j, -0.23 + 0.11j
    g = [1 + 0j, 1 + 0j]
    for a in range(2, mmax):
        B = _raw_block(s, a, lam, mu)  # sector a holds (a+1,1) -> (a,2) and (a+1,1)
        ours = B[a, a - 1] / B[a, a]
        ratio = -f01_sl2r(spec, a, lam, mu) / ours
        g.append(ratio * g[a - 1] * g[1] / g[0])
    return tuple(g[:mmax])


def casimir_block(spec: Sl2rSpec, n: int, lam, mu) -> np.ndarray:
    """Sector-n block for any n, built from Casimir projectors in the table gauge."""
    if n < 0:
        raise ValueError("sector must be >= 0")
    lam, mu = complex(lam), complex(mu)
    B = _raw_block(spec.s, n, lam, mu)
    g = np.array(_gauge(spec.s, max(n + 2, 2)))
    a = np.arange(1, n + 2)
    ga = g[a - 1] * g[n + 1 - a]  # g_a g_{n+2-a}
    return B * ga[:, None] / ga[None, :]


def block(spec: Sl2rSpec, n: int, lam, mu, source: str = "auto") -> np.ndarray:
    """Sector-n block: tables up to n = 4 (``auto``/``table``), Casimir beyond or on request."""
    if source == "table" or (source == "auto" and n <= TABLE_SECTOR_CAP):
        return sector_block(spec, n, lam, mu)
    if source in ("auto", "casimir"):
        return casimir_block(spec, n, lam, mu)
    raise ValueError(f"unknown source {source!r}")


def site_weights(spec: Sl2rSpec, lam, mu, na: int, nq: int) -> np.ndarray:
    """Weights [na, nq, na, nq] for one site of a sector-truncated monodromy."""
    W = np.zeros((na, nq, na, nq), dtype=complex)
    for n in range(na + nq - 1):
        B = block(spec, n, lam, mu)
        for a in range(max(1, n + 2 - nq), min(na, n + 1) + 1):
            for c in range(max(1, n + 2 - nq), min(na, n + 1) + 1):
                W[a - 1, n + 1 - a, c - 1, n + 1 - c] = B[a - 1, c - 1]
    return W


def weight_any(spec: Sl2rSpec, lam, mu, a: int, b: int, c: int, d: int) -> complex:
    n = a + b - 2
    if c + d - 2 != n:
        return 0j
    return complex(block(spec, n, lam, mu)[a - 1, c - 1])


# -- closed forms ----------------------------------------------------------------


def diag_weight_sl2r(spec: Sl2rSpec, lam, mu, a: int, tol: float = POLE_TOL) -> complex:
    x = complex(lam) - complex(mu)
    out = 1 + 0j
    for k in range(1, a):
        out *= (x - (k - 1) * 1j) / guard(x + (2 * spec.s + 1 - k) * 1j, "SL(2,R) diagonal weight", tol)
    return out


def theta_sl2r(spec: Sl2rSpec, lam, mu, tol: float = POLE_TOL) -> complex:
    x = complex(lam) - complex(mu)
    s = spec.s
    return (x - 2j * s) / guard(x + 2j * s, "SL(2,R) theta", tol) * (x + 1j) / guard(x - 1j, "SL(2,R) theta", tol)


def lambda_eig_sl2r(spec: Sl2rSpec, lattice: Lattice, roots, lam, A: int = 50, tol: float = POLE_TOL) -> tuple[complex, float]:
    """Partial sum over a = 1..A of the eigenvalue series and |last term| as tail estimate."""
    if A < 1:
        raise ValueError("cutoff A must be >= 1")
    rts = as_roots(roots)
    check_distinct(rts)
    lam = complex(lam)
    s = spec.s
    total, term = 0j, 0j
    for a in range(1, A + 1):
        term = 1 + 0j
        for mu in lattice.mus:
            term *= diag_weight_sl2r(spec, lam, mu, a, tol)
        for li in rts:
            x = lam - li
            term *= (x - 2j * s) * (x + 1j)
            term /= guard((x - (a - 1) * 1j) * (x - (a - 2) * 1j), "SL(2,R) Lambda", tol)
        total += term
    return total, abs(term)


def bae_residual_sl2r(spec: Sl2rSpec, lattice: Lattice, roots, log_form: bool = True) -> list[complex]:
    rts = as_roots(roots)
    check_distinct(rts)
    s = spec.s
    out = []
    for j, lj in enumerate(rts):
        lhs = [(lj - mu + 2j * s, guard(lj - mu, "SL(2,R) BAE")) for mu in lattice.mus]
        rhs = [(lj - li + 1j, guard(lj - li - 1j, "SL(2,R) BAE")) for i, li in enumerate(rts) if i != j]
        if log_form:
            out.append(log_residual([clog(n) - clog(d) for n, d in lhs], [clog(n) - clog(d) for n, d in rhs]))
        else:
            out.append(complex(np.prod([n / d for n, d in lhs]) - np.prod([n / d for n, d in rhs])))
    return out


def f01_sl2r(spec: Sl2rSpec, a: int, lam, mu, tol: float = POLE_TOL) -> complex:
    s = spec.s
    den = guard(complex(mu) - complex(lam) + (a - 1) * 1j, "SL(2,R) F01", tol)
    return -1j * csqrt(2 * s * a * (2 * s + 1 - a)) / den


def f_closed_sl2r(spec: Sl2rSpec, c: int, b: int, a: int, lam, rapidities, tol: float = POLE_TOL) -> complex:
    s = spec.s
    rap = [complex(r) for r in rapidities]
    if len(rap) != b:
        raise ValueError(f"need {b} rapidities, got {len(rap)}")
    if b < 1 or a < 1:
        raise ValueError("need a, b >= 1")
    if c not in (0, b):
        raise ValueError("closed forms exist only for c = 0 and c = b")
    pair = 1 + 0j
    for i, j in itertools.combinations(range(b), 2):
        x = rap[i] - rap[j]
        pair *= (x - 2j * s) / guard(x - 1j, "SL(2,R) F pair", tol)
    ladder = 1 + 0j
    if c == 0:
        for k in range(1, b):
            ladder *= csqrt((2 * s + 2 - a - k) * (a + b - 1 - k) / ((2 * s + 2 - a - b) * (a + b - 1)))
        single = np.prod([f01_sl2r(spec, a + b - 1, lam, r, tol) for r in rap])
    else:
        for k in range(1, b):
            ladder *= csqrt((2 * s + 1 - a - k) * (a + b - k) / ((2 * s + 1 - a) * a))
        single = np.prod([-f01_sl2r(spec, a, lam, r, tol) for r in rap])
    return complex(ladder * pair * single)


# -- Hamiltonian -----------------------------------------------------------------


def h1(spec: Sl2rSpec, k: int) -> float:
    if k < 1:
        raise ValueError("h1 needs k >= 1")
    return 2 * spec.s / (2 * spec.s + 1 - k)


def h2(spec: Sl2rSpec, k: int, m1: int, m2: int) -> float:
    if k < 1 or m1 < 0 or m2 < 0:
        raise ValueError("h2 needs k >= 1 and m1, m2 >= 0")
    s = spec.s
    out = 2 * s / k
    for i in range(1, k + 1):
        out *= math.sqrt((m1 + i) / (m1 + i - 2 * s - 1) * (m2 + 1 - i) / (m2 - 2 * s - i))
    return out


def hamiltonian_action(spec: Sl2rSpec, m1: int, m2: int) -> dict[tuple[int, int], float]:
    """H_{12}|m1, m2> as {(m1', m2'): coefficient}; H_{12}|0, 0> = 0."""
    if m1 < 0 or m2 < 0:
        raise ValueError("occupations must be >= 0")
    out: dict[tuple[int, int], float] = {}
    diag = sum(h1(spec, k) for k in range(1, m1 + 1)) + sum(h1(spec, k) for k in range(1, m2 + 1))
    if diag != 0:
        out[(m1, m2)] = diag
    for k in range(1, m1 + 1):
        out[(m1 - k, m2 + k)] = out.get((m1 - k, m2 + k), 0.0) + h2(spec, k, m2, m1)
    for k in range(1, m2 + 1):
        out[(m1 + k, m2 - k)] = out.get((m1 + k, m2 - k), 0.0) + h2(spec, k, m1, m2)
    return out


def sector_basis(L: int, n: int) -> list[tuple[int, ...]]:
    """Occupation patterns of L sites with total n, site 1 most significant."""
    return [c for c in itertools.product(range(n + 1), repeat=L) if sum(c) == n]


def build_hamiltonian(spec: Sl2rSpec, L: int, n: int, cap: int = HAM_SECTOR_CAP) -> np.ndarray:
    """Periodic chain H = sum_i H_{i,i+1} on the charge-n subspace."""
    if L < 2:
        raise ValueError("Hamiltonian needs L >= 2")
    if n < 0 or n > cap:
        raise SectorError(f"sector {n} outside 0..{cap}")
    basis = sector_basis(L, n)
    if len(basis) > HAM_DIM_CAP:
        raise SectorError(f"sector dimension {len(basis)} above {HAM_DIM_CAP}")
    index = {c: i for i, c in enumerate(basis)}
    H = np.zeros((len(basis), len(basis)))
    for col, conf in enumerate(basis):
        for i in range(L):
            j = (i + 1) % L
            for (p, q), v in hamiltonian_action(spec, conf[i], conf[j]).items():
                new = list(conf)
                new[i], new[j] = p, q
                H[index[tuple(new)], col] += v
    return H


def hamiltonian_from_r(spec: Sl2rSpec, n: int, h: float = 1e-5, source: str = "auto") -> np.ndarray:
    """Sector-n block of d/dlam log R(lam, 0) at lam = 0, normalized like the two-site action.

    Central differences with step h, Richardson-extrapolated once.  The
    normalization is alpha X + beta with beta fixed by H|0,0> = 0 and alpha by
    a unit |0,1> -> |0,1> coefficient.
    """
    if n < 0 or n > TABLE_SECTOR_CAP:
        raise SectorError(f"sector {n} outside 0..{TABLE_SECTOR_CAP}")
    if h < 1e-12:
        raise ValueError("differentiation step underflow")

    def logder(m):
        R0 = block(spec, m, 0.0, 0.0, source)

        def d(step):
            return (block(spec, m, step, 0.0, source) - block(spec, m, -step, 0.0, source)) / (2 * step)

        D = (4 * d(h / 2) - d(h)) / 3
        return np.linalg.solve(R0, D)

    x0 = logder(0)[0, 0]
    x1 = logder(1)[0, 0]
    alpha = 1 / (x1 - x0)
    X = logder(n)
    return alpha * (X - x0 * np.eye(n + 1))


def two_site_block(spec: Sl2rSpec, n: int) -> np.ndarray:
    """hamiltonian_action on the two-site sector n, basis |m1, n - m1> with m1 ascending."""
    H = np.zeros((n + 1, n + 1))
    for m1 in range(n + 1):
        for (p, q), v in hamiltonian_action(spec, m1, n - m1).items():
            H[p, m1] += v
    return H


# -- coordinate Bethe ansatz -----------------------------------------------------


def energy1(k) -> float:
    return 2 * (1 - np.cos(k))


def s_matrix(spec: Sl2rSpec, k1, k2, tol: float = POLE_TOL) -> complex:
    s = spec.s
    e1, e2 = cmath.exp(1j * k1), cmath.exp(1j * k2)
    num = 1 + e1 * e2 + (2 * s - 1) * e1 - (2 * s + 1) * e2
    den = 1 + e1 * e2 + (2 * s - 1) * e2 - (2 * s + 1) * e1
    return -num / guard(den, "two-body S-matrix", tol)


def momentum_from_rapidity(spec: Sl2rSpec, lamj) -> complex:
    """k with exp(ik) = (lam + 2 s i) / lam."""
    lamj = guard(complex(lamj), "momentum map")
    return -1j * cmath.log((lamj + 2j * spec.s) / lamj)


def rapidity_from_momentum(spec: Sl2rSpec, k) -> complex:
    """Inverse of momentum_from_rapidity: lam = 2 s i / (exp(ik) - 1)."""
    return 2j * spec.s / guard(cmath.exp(1j * complex(k)) - 1, "rapidity map (k = 0 is infinite)")


def d_param(spec: Sl2rSpec) -> float:
    s = spec.s
    return -2 * math.sqrt(s / (2 * s - 1))


@dataclass(frozen=True)
class TwoParticleSolution:
    k1: complex
    k2: complex
    energy: complex
    residuals: tuple[float, float]
    psi: np.ndarray
    eigen_residual: float


def two_particle_state(spec: Sl2rSpec, L: int, k1, k2) -> np.ndarray:
    """psi_2 in the sector-2 basis of :func:`sector_basis` from a momentum pair.

    At k1 = k2 = 0 the S-matrix is 0/0; its limit along any direction is 1.
    """
    if abs(k1) < 1e-12 and abs(k2) < 1e-12:
        S = 1.0 + 0j
    else:
        S = s_matrix(spec, k1, k2)
    d = d_param(spec)

    def phi(x1, x2):
        return cmath.exp(1j * (k1 * x1 + k2 * x2)) + S * cmath.exp(1j * (k2 * x1 + k1 * x2))

    basis = sector_basis(L, 2)
    psi = np.zeros(len(basis), dtype=complex)
    for i, conf in enumerate(basis):
        occ = [x + 1 for x, m in enumerate(conf) for _ in range(m)]
        if occ[0] == occ[1]:
            psi[i] = -phi(occ[0], occ[0]) / d
        else:
            psi[i] = phi(occ[0], occ[1])
    return psi


def _quantization(spec: Sl2rSpec, L: int, k):
    k1, k2 = k
    return np.array(
        [cmath.exp(1j * k1 * L) * s_matrix(spec, k1, k2) - 1, cmath.exp(1j * k2 * L) * s_matrix(spec, k2, k1) - 1]
    )


def cba_two_particle(
    spec: Sl2rSpec,
    L: int,
    n_random: int = 40,
    rng: Optional[np.random.Generator] = None,
    tol: float = 1e-10,
) -> list[TwoParticleSolution]:
    """Momentum pairs solving exp(i k_i L) S(k_i, k_j) = 1, deduplicated, with psi_2 checked.

    Seeds: free momenta 2 pi (m1, m2) / L nudged off the diagonal, plus random
    complex seeds.  Pairs with k1 = k2 or a vanishing wave function are dropped,
    except the double descendant k1 = k2 = 0, which is always included.
    """
    if L < 3:
        raise ValueError("two-particle analysis needs L >= 3")
    rng = np.random.default_rng(0) if rng is None else rng
    H = build_hamiltonian(spec, L, 2)
    seeds = []
    for m1 in range(L):
        for m2 in range(m1, L):
            for nudge in (0.05, 0.05j, -0.05 + 0.03j):
                seeds.append(np.array([2 * np.pi * m1 / L + nudge, 2 * np.pi * m2 / L - nudge]))
    for _ in range(n_random):
        seeds.append(rng.uniform(0, 2 * np.pi, 2) + 1j * rng.normal(0, 0.7, 2))
    found: list[TwoParticleSolution] = []
    psi0 = two_particle_state(spec, L, 0j, 0j)
    res0 = float(np.linalg.norm(H @ psi0) / np.linalg.norm(psi0))
    found.append(TwoParticleSolution(0j, 0j, 0j, (0.0, 0.0), psi0, res0))
    for x0 in seeds:
        k = _newton2(lambda z: _quantization(spec, L, z), x0.astype(complex), tol)
        if k is None:
            continue
        k = np.array([_wrap(k[0]), _wrap(k[1])])
        if abs(k[0] - k[1]) < 1e-6:
            continue
        if any(_same_pair(k, (f.k1, f.k2)) for f in found):
            continue
        try:
            psi = two_particle_state(spec, L, k[0], k[1])
        except ZeroDivisionError:
            continue
        nrm = np.linalg.norm(psi)
        if not np.isfinite(nrm) or nrm < 1e-8:
            continue
        E = energy1(k[0]) + energy1(k[1])
        res = float(np.linalg.norm(H @ psi - E * psi) / nrm)
        q = np.abs(_quantization(spec, L, k))
        found.append(TwoParticleSolution(complex(k[0]), complex(k[1]), complex(E), (float(q[0]), float(q[1])), psi, res))
    return found


def _wrap(k: complex) -> complex:
    re = (k.real + np.pi) % (2 * np.pi) - np.pi
    if abs(re + np.pi) < 1e-12:
        re = np.pi
    return complex(re, k.imag)


def _same_pair(k, other, tol: float = 1e-7) -> bool:
    a = (complex(k[0]), complex(k[1]))
    for o in (other, other[::-1]):
        if all(abs(cmath.exp(1j * x) - cmath.exp(1j * y)) < tol for x, y in zip(a, o)):
            return True
    return False


def _newton2(fun, x0, tol, max_iter: int = 100, h: float = 1e-7):
    x = np.array(x0, dtype=complex)
    try:
        f = fun(x)
    except ArithmeticError:
        return None
    for _ in range(max_iter):
        if np.max(np.abs(f)) < tol:
            return x
        J = np.empty((2, 2), dtype=complex)
        try:
            for i in range(2):
                dx = np.zeros(2, dtype=complex)
                dx[i] = h
                J[:, i] = (fun(x + dx) - fun(x - dx)) / (2 * h)
            step = np.linalg.solve(J, -f)
        except (ArithmeticError, np.linalg.LinAlgError):
            return None
        t = 1.0
        while t > 1e-4:
            try:
                fn = fun(x + t * step)
                if np.max(np.abs(fn)) < np.max(np.abs(f)):
                    break
            except ArithmeticError:
                pass
            t *= 0.5
        else:
            return None
        x, f = x + t * step, fn
        if np.max(np.abs(x.imag)) > 20:
            return None
    return x if np.max(np.abs(f)) < tol else None


# -- limits ----------------------------------------------------------------------


def limit_map(spec: Sl2rSpec, N: int, k: int = 1):
    """Colored model whose N -> infinity limit gives this spec, and the spectral rescaling."""
    from .colored import ColoredSpec

    if math.gcd(k, N) != 1:
        raise ValueError(f"k={k} and N={N} are not coprime")
    gb = -2 * spec.s * 1j * math.pi * k / N
    return ColoredSpec(N, k, gb), -math.pi * k / N


# Constant signs between the compact closed-form b=1 amplitudes and f01_sl2r,
# fixed by the square-root branches of the respective closed forms.  Both are
# independent of N, a and the rapidities.
COLORED_F_SIGN = -1.0
XXZ_F_SIGN = 1.0


@dataclass(frozen=True)
class LimitRow:
    N: int
    theta_error: float
    f_error: float


def limit_errors(spec: Sl2rSpec, N: int, lam, mu, route: str = "colored", k: int = 1, amax: int = 3) -> LimitRow:
    """Relative errors of the compact theta and b=1 F against this spec at one N.

    ``route="colored"`` uses :func:`limit_map`; ``route="xxz"`` (only s = -1/2)
    uses XXZ at gamma = 2 pi / N with spectral variables rescaled by gamma.
    """
    from . import colored, xxz

    lam, mu = complex(lam), complex(mu)
    th = theta_sl2r(spec, lam, mu)
    fs = [f01_sl2r(spec, a, lam, mu) for a in range(1, amax + 1)]
    if route == "colored":
        cs, c = limit_map(spec, N, k)
        th_c = colored.theta_colored(cs, c * lam, c * mu)
        f_c = [COLORED_F_SIGN * colored.f01_colored(cs, a, c * lam, c * mu) for a in range(1, amax + 1)]
    elif route == "xxz":
        if spec.s != -0.5:
            raise ValueError("the XXZ route reaches only s = -1/2")
        g = 2 * math.pi / N
        xs = xxz.XxzSpec(N, g, generic=False, cap=N)
        th_c = xxz.theta_xxz(xs, g * lam, g * mu)
        f_c = [XXZ_F_SIGN * xxz.f01_xxz(xs, a, g * lam, g * mu) for a in range(1, amax + 1)]
    else:
        raise ValueError(f"unknown limit route {route!r}")
    ef = max(abs(x - y) / abs(y) for x, y in zip(f_c, fs))
    return LimitRow(N, float(abs(th_c - th) / abs(th)), float(ef))


def limit_table(spec: Sl2rSpec, Ns=(64, 128, 256), lam=0.31 + 0.17j, mu=-0.42 + 0.08j, route: str = "colored", k: int = 1):
    """Errors at each N and the ratios err(2N) / err(N); first-order convergence gives 1/2.

    Returns ``(rows, theta_ratios, f_ratios)``.
    """
    rows = [limit_errors(spec, N, lam, mu, route=route, k=k) for N in Ns]
    th = [b.theta_error / a.theta_error for a, b in zip(rows, rows[1:])]
    fr = [b.f_error / a.f_error for a, b in zip(rows, rows[1:])]
    return rows, th, fr


def provider(spec: Sl2rSpec, truncation: int = TABLE_SECTOR_CAP + 1) -> WeightProvider:
    """Non-compact provider: tables through sector 4, Casimir blocks above."""

    def tensor_fn(lam, mu):
        return site_weights(spec, lam, mu, truncation, truncation)

    return WeightProvider(
        name=f"sl2r-s{spec.s:g}",
        local_dim=truncation,
        tensor_fn=tensor_fn,
        theta_closed=lambda lam, mu: theta_sl2r(spec, lam, mu),
        sector_cap=TABLE_SECTOR_CAP,
        additive=True,
        compact=False,
        weight_fn=lambda lam, mu, a, b, c, d: weight_any(spec, lam, mu, a, b, c, d),
        site_fn=lambda lam, mu, na, nq: site_weights(spec, lam, mu, na, nq),
        params={"family": "sl2r", "s": spec.s, "period": None},
    )
