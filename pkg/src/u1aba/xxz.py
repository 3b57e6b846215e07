"""Spin-s XXZ vertex model built from the U_q[SU(2)] braid and its projectors.

The R-matrix is ``R = P Rcheck`` with ``Rcheck`` a sum over spin-j projectors
of the two-site braid ``Shat(q)``, ``q = exp(-2 i gamma)``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction

import mpmath
import numpy as np

from .common import (
    BetheRoots,
    Lattice,
    as_roots,
    check_distinct,
    clog,
    csqrt,
    guard,
    log_residual,
    POLE_TOL,
)
from .provider import WeightProvider
from .tensor import mp_block_projectors, permutation, weyl

N_CAP = 8
GENERIC_TOL = 1e-8


@dataclass(frozen=True)
class XxzSpec:
    """Spin-(N-1)/2 XXZ data.

    ``generic=False`` skips the generic-q validation.  Root-of-unity anisotropies
    (the colored specialization, the large-N limit route) are then allowed for
    the closed-form functions, while the braid projectors may be degenerate.
    ``cap`` bounds N; raise it for closed-form-only use at large N.
    """

    N: int
    gamma: float
    generic: bool = True
    cap: int = N_CAP

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise ValueError("XXZ needs integer N >= 2")
        if self.N > self.cap:
            raise ValueError(f"N={self.N} above cap {self.cap}")
        g = float(self.gamma)
        if not math.isfinite(g):
            raise ValueError("gamma must be finite")
        object.__setattr__(self, "gamma", g)
        if not self.generic:
            return
        # q^m = 1 iff gamma = pi p / m
        for m in range(1, 2 * self.N + 1):
            x = g * m / math.pi
            if abs(x - round(x)) * math.pi / m < GENERIC_TOL:
                frac = Fraction(round(x), m)
                raise ValueError(f"q not generic: gamma is pi*{frac} (q^{m} = 1)")

    @property
    def q(self) -> complex:
        return cmath.exp(-2j * self.gamma)

    @property
    def spin(self) -> float:
        return (self.N - 1) / 2


def w_func(q: complex, n: int, eps: int, N: int) -> complex:
    """W_eps(n) = prod_{k=1..n} (1 - q^{k - eps N})."""
    if n < 0:
        raise ValueError("w_func needs n >= 0")
    out = 1 + 0j
    for k in range(1, n + 1):
        out *= 1 - q ** (k - eps * N)
    return out


def _braid_entry(N: int, gamma, a: int, b: int, c: int, d: int, lib=cmath):
    # lib is cmath or mpmath.mp; both give principal square roots
    if a + b != c + d or a < d or c < b:
        return 0
    q = lib.exp(-2j * gamma)
    # a half-integer, exact in binary
    ex = (N * (N - 1) + (b - 1) * (d - N) + (d - 1) * (b - N)) / 2
    r = 1
    for e in (0, 1):
        r *= lib.sqrt(w_func(q, a - 1, e, N)) * lib.sqrt(w_func(q, c - 1, e, N))
        r /= lib.sqrt(w_func(q, d - 1, e, N)) * lib.sqrt(w_func(q, b - 1, e, N))
    return -((-1) ** N) * lib.exp(-2j * gamma * ex) / w_func(q, a - d, 0, N) * r


def braid_weight(spec: XxzSpec, a: int, b: int, c: int, d: int) -> complex:
    """S_{c,d}^{a,b}(q); zero outside a+b = c+d, a >= d, c >= b.

    Each W factor under the square roots takes its own principal root.
    """
    for i in (a, b, c, d):
        if not 1 <= i <= spec.N:
            raise IndexError(f"braid index {i} out of range 1..{spec.N}")
    return complex(_braid_entry(spec.N, spec.gamma, a, b, c, d))


@lru_cache(maxsize=64)
def _braid(N: int, gamma: float) -> np.ndarray:
    spec = XxzSpec(N, gamma, generic=False)
    M = np.zeros((N * N, N * N), dtype=complex)
    for a, b, c, d in itertools.product(range(1, N + 1), repeat=4):
        s = braid_weight(spec, a, b, c, d)
        if s != 0:
            M += s * np.kron(weyl(N, b, d), weyl(N, a, c))
    M.setflags(write=False)
    return M


def braid_matrix(spec: XxzSpec) -> np.ndarray:
    """Assembled Shat(q) = sum S_{c,d}^{a,b} e_{b,d} (x) e_{a,c}."""
    return _braid(spec.N, spec.gamma)


def braid_eigenvalue(spec: XxzSpec, j: int) -> complex:
    """Eigenvalue (-1)^j q^{j(j+1)/2} of Shat on the spin-j channel."""
    return (-1) ** j * cmath.exp(-1j * spec.gamma * j * (j + 1))


@lru_cache(maxsize=64)
def _projectors(N: int, gamma: float) -> tuple[np.ndarray, ...]:
    gam = mpmath.mpf(gamma)

    def entry(r, c):
        b, a = divmod(r, N)
        d, cc = divmod(c, N)
        return _braid_entry(N, gam, a + 1, b + 1, cc + 1, d + 1, lib=mpmath.mp)

    # the charge block of size m carries the top m spins N-1, ..., N-m
    def roots_of_block(n, m):
        labels = list(range(N - 1, N - 1 - m, -1))
        return labels, [(-1) ** j * mpmath.exp(-1j * gam * j * (j + 1)) for j in labels]

    out = mp_block_projectors(entry, N, roots_of_block)
    for P in out:
        P.setflags(write=False)
    return tuple(out)


def projector(spec: XxzSpec, j: int) -> np.ndarray:
    """Spin-j projector of the braid by Lagrange interpolation over its spectrum."""
    if not 0 <= j <= spec.N - 1:
        raise IndexError(f"projector index {j} out of range 0..{spec.N - 1}")
    return _projectors(spec.N, spec.gamma)[j]


def _coeffs(spec: XxzSpec, x: complex, tol: float = POLE_TOL) -> list[complex]:
    # coefficient of P_j normalized so the top channel (containing |1,1>) is 1
    N, g = spec.N, spec.gamma
    out = []
    for j in range(N):
        c = 1 + 0j
        for k in range(j + 1, N):
            c *= cmath.sinh(1j * k * g - x) / guard(cmath.sinh(1j * k * g + x), "xxz Rcheck", tol)
        out.append(c)
    return out


def rcheck_matrix(spec: XxzSpec, lam: complex, mu: complex, tol: float = POLE_TOL) -> np.ndarray:
    x = complex(lam) - complex(mu)
    # poles of the unnormalized form: sinh(i k gamma - x) = 0
    for k in range(1, spec.N):
        guard(cmath.sinh(1j * k * spec.gamma - x), "xxz Rcheck", tol)
    Ps = _projectors(spec.N, spec.gamma)
    return sum(c * P for c, P in zip(_coeffs(spec, x, tol), Ps))


def r_matrix(spec: XxzSpec, lam: complex, mu: complex, tol: float = POLE_TOL) -> np.ndarray:
    return permutation(spec.N) @ rcheck_matrix(spec, lam, mu, tol)


def r_weight(spec: XxzSpec, lam, mu, a: int, b: int, c: int, d: int, tol: float = POLE_TOL) -> complex:
    """R(lam, mu)_{a,b}^{c,d}: entry ((a,b),(c,d)) of P Rcheck(lam - mu)."""
    N = spec.N
    for i in (a, b, c, d):
        if not 1 <= i <= N:
            raise IndexError(f"weight index {i} out of range 1..{N}")
    if a + b != c + d:
        return 0j
    R = r_matrix(spec, lam, mu, tol)
    return complex(R[(a - 1) * N + (b - 1), (c - 1) * N + (d - 1)])


def diag_weight(spec: XxzSpec, lam, mu, a: int, tol: float = POLE_TOL) -> complex:
    x = complex(lam) - complex(mu)
    g, N = spec.gamma, spec.N
    out = 1 + 0j
    for k in range(1, a):
        out *= cmath.sinh(x - 1j * (k - 1) * g) / guard(cmath.sinh(x + 1j * (N - k) * g), "xxz diag", tol)
    return out


def theta_xxz(spec: XxzSpec, lam, mu, tol: float = POLE_TOL) -> complex:
    x = complex(lam) - complex(mu)
    g, N = spec.gamma, spec.N
    num = cmath.sinh(x - 1j * (N - 1) * g) * cmath.sinh(x + 1j * g)
    den = cmath.sinh(x + 1j * (N - 1) * g) * cmath.sinh(x - 1j * g)
    return num / guard(den, "xxz theta", tol)


def lambda_eig_xxz(spec: XxzSpec, lattice: Lattice, roots, lam, tol: float = POLE_TOL) -> complex:
    rts = as_roots(roots)
    check_distinct(rts)
    lam = complex(lam)
    g, N = spec.gamma, spec.N
    total = 0j
    for a in range(1, N + 1):
        term = 1 + 0j
        for mu in lattice.mus:
            term *= diag_weight(spec, lam, mu, a, tol)
        for li in rts:
            x = lam - li
            term *= cmath.sinh(x - 1j * (N - 1) * g) * cmath.sinh(x + 1j * g)
            term /= guard(cmath.sinh(x - 1j * (a - 1) * g) * cmath.sinh(x - 1j * (a - 2) * g), "xxz Lambda", tol)
        total += term
    return total


def bae_residual_xxz(spec: XxzSpec, lattice: Lattice, roots, log_form: bool = True, shifted: bool = False) -> list[complex]:
    """Per-root residual of the XXZ Bethe equations.

    ``log_form`` returns sum of log LHS minus sum of log RHS folded by the
    nearest multiple of 2 pi i; otherwise LHS - RHS.  With ``shifted`` the
    roots are taken in the symmetric convention and mapped back by
    ``lam -> lam - i (N-1) gamma / 2`` before evaluation.
    """
    rts = list(as_roots(roots))
    check_distinct(rts)
    g, N = spec.gamma, spec.N
    if shifted:
        rts = [r - 0.5j * (N - 1) * g for r in rts]
    out = []
    for j, lj in enumerate(rts):
        lhs = [
            (cmath.sinh(lj - mu + 1j * (N - 1) * g), guard(cmath.sinh(lj - mu), "xxz BAE"))
            for mu in lattice.mus
        ]
        rhs = [
            (cmath.sinh(lj - li + 1j * g), guard(cmath.sinh(lj - li - 1j * g), "xxz BAE"))
            for i, li in enumerate(rts)
            if i != j
        ]
        if log_form:
            out.append(
                log_residual(
                    [clog(n) - clog(d) for n, d in lhs],
                    [clog(n) - clog(d) for n, d in rhs],
                )
            )
        else:
            L = np.prod([n / d for n, d in lhs]) if lhs else 1
            R = np.prod([n / d for n, d in rhs]) if rhs else 1
            out.append(complex(L - R))
    return out


def g0(spec: XxzSpec, a: int, b: int) -> complex:
    N, g = spec.N, spec.gamma
    out = 1 + 0j
    for l in range(1, b):
        r = (cmath.sinh(1j * (a + b - 1 - l) * g) / cmath.sinh(1j * (a + b - 1) * g)) * (
            cmath.sinh(1j * (N + 1 - a - l) * g) / cmath.sinh(1j * (N + 1 - a - b) * g)
        )
        out *= csqrt(r)
    return out


def f01_xxz(spec: XxzSpec, a: int, lam, mu, tol: float = POLE_TOL) -> complex:
    N, g = spec.N, spec.gamma
    lam, mu = complex(lam), complex(mu)
    num = csqrt(cmath.sinh(1j * (N - 1) * g) * cmath.sinh(1j * (N - a) * g) * cmath.sinh(1j * a * g))
    den = csqrt(cmath.sinh(1j * g)) * guard(cmath.sinh(1j * (a - 1) * g - lam + mu), "xxz F01", tol)
    return cmath.exp(mu - lam) * num / den


def f_closed_xxz(spec: XxzSpec, c: int, b: int, a: int, lam, rapidities, tol: float = POLE_TOL) -> complex:
    """Closed-form amplitude cF_b^(a) for c in {0, b}."""
    N, g = spec.N, spec.gamma
    rap = [complex(r) for r in rapidities]
    if len(rap) != b:
        raise ValueError(f"need {b} rapidities, got {len(rap)}")
    if not 1 <= b <= N - 1 or not 1 <= a <= N - b:
        raise ValueError(f"(b, a) = ({b}, {a}) outside 1 <= b <= N-1, 1 <= a <= N-b")
    if c not in (0, b):
        raise ValueError("closed forms exist only for c = 0 and c = b")
    pair = 1 + 0j
    for i in range(b):
        for j in range(i + 1, b):
            x = rap[i] - rap[j]
            pair *= cmath.sinh(x - 1j * (N - 1) * g) / guard(cmath.sinh(x - 1j * g), "xxz F pair", tol)
    if c == 0:
        G = g0(spec, a, b)
        single = np.prod([f01_xxz(spec, a + b - 1, lam, r, tol) for r in rap])
    else:
        G = g0(spec, N + 1 - a - b, b)
        single = np.prod([-f01_xxz(spec, a, lam, r, tol) for r in rap])
    return complex(G * pair * single)


def provider(spec: XxzSpec) -> WeightProvider:
    N = spec.N

    def fn(lam, mu):
        return r_matrix(spec, lam, mu).reshape(N, N, N, N)

    def th(lam, mu):
        return theta_xxz(spec, lam, mu)

    return WeightProvider(
        name=f"xxz-N{N}",
        local_dim=N,
        tensor_fn=fn,
        theta_closed=th,
        additive=True,
        params={"family": "xxz", "N": N, "gamma": spec.gamma, "period": 1j * math.pi},
    )
