"""Colored vertex model at roots of unity with additive spectral dependence.

The braid ``Shat(gbar, omega)`` carries a continuous color ``gbar`` and
``omega = exp(2 pi i k / N)`` with ``gcd(k, N) = 1``.  Baxterizing it over its
N eigenvalues ``xi_i`` gives the R-matrix.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .common import Lattice, POLE_TOL, as_roots, check_distinct, clog, csqrt, guard, log_residual
from .provider import WeightProvider
from .tensor import MP_LOCK, mp_block_projectors, permutation, weyl
from .xxz import XxzSpec

POLE_LINE_TOL = 1e-8


@dataclass(frozen=True)
class ColoredSpec:
    """Colored model data; ``omega`` is always derived from (N, k)."""

    N: int
    k: int
    gammaBar: complex

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise ValueError("colored model needs integer N >= 2")
        if not 1 <= self.k <= self.N - 1:
            raise ValueError(f"k={self.k} outside 1..N-1")
        if math.gcd(self.k, self.N) != 1:
            raise ValueError(f"coprimality invariant violated: gcd(k={self.k}, N={self.N}) != 1")
        gb = complex(self.gammaBar)
        if not (math.isfinite(gb.real) and math.isfinite(gb.imag)):
            raise ValueError("gammaBar must be finite")
        object.__setattr__(self, "gammaBar", gb)
        # the weights only involve the lines j = 1..N-1
        for j in range(1, self.N):
            if abs(cmath.sinh(gb + 1j * math.pi * self.k * (j - 1) / self.N)) < POLE_LINE_TOL:
                raise ValueError(f"gammaBar on pole line -i pi k ({j}-1)/N")

    @property
    def omega(self) -> complex:
        return cmath.exp(2j * math.pi * self.k / self.N)

    @property
    def eta(self) -> float:
        """pi k / N, the angle appearing in every trigonometric formula."""
        return math.pi * self.k / self.N


def h_func(x: complex, n: int, omega: complex) -> complex:
    """H(x, n) = prod_{k=0..n-1} (1 - x omega^k)."""
    if n < 0:
        raise ValueError("h_func needs n >= 0")
    out = 1 + 0j
    for k in range(n):
        out *= 1 - x * omega**k
    return out


def _braid_entry(N: int, w, gb, a: int, b: int, c: int, d: int, lib=cmath):
    # lib is cmath or mpmath.mp; each H factor under a root takes its own principal root
    if a + b != c + d or a < d or c < b:
        return 0
    den = h_func(w, a - d, w)
    if abs(den) < 1e-12:
        raise ZeroDivisionError(f"H(omega, {a - d}) vanishes")
    e2 = lib.exp(2 * gb)
    r = 1
    for x in (w, e2):
        r *= lib.sqrt(h_func(x, a - 1, w)) * lib.sqrt(h_func(x, c - 1, w))
        r /= lib.sqrt(h_func(x, d - 1, w)) * lib.sqrt(h_func(x, b - 1, w))
    return w ** ((b - 1) * (d - 1)) * lib.exp(gb * (b + d - 2)) / den * r


def colored_braid_weight(spec: ColoredSpec, a: int, b: int, c: int, d: int) -> complex:
    """S_{c,d}^{a,b}(gbar, omega); zero outside a+b = c+d, a >= d, c >= b."""
    for i in (a, b, c, d):
        if not 1 <= i <= spec.N:
            raise IndexError(f"braid index {i} out of range 1..{spec.N}")
    return complex(_braid_entry(spec.N, spec.omega, spec.gammaBar, a, b, c, d))


@lru_cache(maxsize=128)
def _braid(N: int, k: int, gb: complex) -> np.ndarray:
    spec = ColoredSpec(N, k, gb)
    M = np.zeros((N * N, N * N), dtype=complex)
    for a, b, c, d in itertools.product(range(1, N + 1), repeat=4):
        s = colored_braid_weight(spec, a, b, c, d)
        if s != 0:
            M += s * np.kron(weyl(N, b, d), weyl(N, a, c))
    M.setflags(write=False)
    return M


def colored_braid(spec: ColoredSpec) -> np.ndarray:
    return _braid(spec.N, spec.k, spec.gammaBar)


def colored_braid_pair(N: int, k: int, g1: complex, g2: complex) -> np.ndarray:
    """Braid between two strings carrying colors g1, g2 (equal colors give Shat)."""
    if abs(g1 - g2) > 0:
        raise NotImplementedError("only the equal-color (additive) braid is built")
    return colored_braid(ColoredSpec(N, k, g1))


def xi(spec: ColoredSpec, i: int) -> complex:
    if not 1 <= i <= spec.N:
        raise IndexError(f"xi index {i} out of range 1..{spec.N}")
    return (-1) ** (i + 1) * spec.omega ** ((i - 2) * (i - 1) // 2) * cmath.exp(2 * spec.gammaBar * (i - 1))


def rho(spec: ColoredSpec, i: int, lam, tol: float = POLE_TOL) -> complex:
    e = cmath.exp(2 * complex(lam))
    out = 1 + 0j
    for k in range(i, spec.N):
        r = xi(spec, k + 1) / xi(spec, k)
        out *= (1 + e * r) / guard(e + r, "colored rho", tol)
    return out


@lru_cache(maxsize=128)
def _projectors(N: int, k: int, gb: complex) -> tuple[np.ndarray, ...]:
    spec = ColoredSpec(N, k, gb)
    targets = [xi(spec, i) for i in range(1, N + 1)]
    for i in range(N):
        for j in range(i + 1, N):
            if abs(targets[i] - targets[j]) < 1e-8:
                raise ZeroDivisionError(f"xi_{i + 1} and xi_{j + 1} collide")
    with MP_LOCK, mpmath.workdps(40):
        w = mpmath.expjpi(mpmath.mpf(2 * k) / N)
    g = mpmath.mpc(gb)

    def entry(r, c):
        b, a = divmod(r, N)
        d, cc = divmod(c, N)
        return _braid_entry(N, w, g, a + 1, b + 1, cc + 1, d + 1, lib=mpmath.mp)

    def xi_mp(i):
        return (-1) ** (i + 1) * w ** ((i - 2) * (i - 1) // 2) * mpmath.exp(2 * g * (i - 1))

    # the charge-n block carries xi_i for max(0, n-N+1) < i <= min(n, N-1) + 1
    def roots_of_block(n, m):
        labels = list(range(max(0, n - N + 1), min(n, N - 1) + 1))
        return labels, [xi_mp(i + 1) for i in labels]

    out = mp_block_projectors(entry, N, roots_of_block)
    for P in out:
        P.setflags(write=False)
    return tuple(out)


def colored_projector(spec: ColoredSpec, i: int) -> np.ndarray:
    """Projector onto the xi_i eigenspace of the braid."""
    return _projectors(spec.N, spec.k, spec.gammaBar)[i - 1]


def _coeffs(spec: ColoredSpec, x: complex, tol: float) -> list[complex]:
    # rho_l / rho_1 so the xi_1 channel (containing |1,1>) has coefficient 1
    N, gb, eta = spec.N, spec.gammaBar, spec.eta
    out = []
    for l in range(1, N + 1):
        c = 1 + 0j
        for j in range(1, l):
            c *= cmath.sinh(1j * eta * (j - 1) + gb - x) / guard(cmath.sinh(1j * eta * (j - 1) + gb + x), "colored Rcheck", tol)
        out.append(c)
    return out


def rcheck_colored(spec: ColoredSpec, lam, mu, tol: float = POLE_TOL) -> np.ndarray:
    x = complex(lam) - complex(mu)
    for j in range(1, spec.N):
        guard(cmath.sinh(1j * spec.eta * (j - 1) + spec.gammaBar - x), "colored Rcheck", tol)
    Ps = _projectors(spec.N, spec.k, spec.gammaBar)
    return sum(c * P for c, P in zip(_coeffs(spec, x, tol), Ps))


def r_matrix_colored(spec: ColoredSpec, lam, mu, tol: float = POLE_TOL) -> np.ndarray:
    return permutation(spec.N) @ rcheck_colored(spec, lam, mu, tol)


def r_weight_colored(spec: ColoredSpec, lam, mu, a: int, b: int, c: int, d: int, tol: float = POLE_TOL) -> complex:
    N = spec.N
    for i in (a, b, c, d):
        if not 1 <= i <= N:
            raise IndexError(f"weight index {i} out of range 1..{N}")
    if a + b != c + d:
        return 0j
    R = r_matrix_colored(spec, lam, mu, tol)
    return complex(R[(a - 1) * N + (b - 1), (c - 1) * N + (d - 1)])


def diag_weight_colored(spec: ColoredSpec, lam, mu, a: int, tol: float = POLE_TOL) -> complex:
    x = complex(lam) - complex(mu)
    eta, gb = spec.eta, spec.gammaBar
    out = 1 + 0j
    for j in range(1, a):
        out *= cmath.sinh(x + 1j * eta * (j - 1)) / guard(cmath.sinh(x + gb + 1j * eta * (j - 1)), "colored diag", tol)
    return out


def theta_colored(spec: ColoredSpec, lam, mu, tol: float = POLE_TOL) -> complex:
    x = complex(lam) - complex(mu)
    eta, gb = spec.eta, spec.gammaBar
    num = cmath.sinh(x - 1j * eta) * cmath.sinh(x - gb)
    den = cmath.sinh(x + 1j * eta) * cmath.sinh(x + gb)
    return num / guard(den, "colored theta", tol)


def lambda_eig_colored(spec: ColoredSpec, lattice: Lattice, roots, lam, tol: float = POLE_TOL) -> complex:
    rts = as_roots(roots)
    check_distinct(rts)
    lam = complex(lam)
    eta, gb, N = spec.eta, spec.gammaBar, spec.N
    total = 0j
    for a in range(1, N + 1):
        term = 1 + 0j
        for mu in lattice.mus:
            term *= diag_weight_colored(spec, lam, mu, a, tol)
        for li in rts:
            x = lam - li
            term *= cmath.sinh(x - gb) * cmath.sinh(x - 1j * eta)
            term /= guard(cmath.sinh(x - 1j * eta * (1 - a)) * cmath.sinh(x - 1j * eta * (2 - a)), "colored Lambda", tol)
        total += term
    return total


def bae_residual_colored(spec: ColoredSpec, lattice: Lattice, roots, log_form: bool = True) -> list[complex]:
    rts = as_roots(roots)
    check_distinct(rts)
    eta, gb = spec.eta, spec.gammaBar
    out = []
    for j, lj in enumerate(rts):
        lhs = [(cmath.sinh(lj - mu + gb), guard(cmath.sinh(lj - mu), "colored BAE")) for mu in lattice.mus]
        rhs = [
            (cmath.sinh(lj - li - 1j * eta), guard(cmath.sinh(lj - li + 1j * eta), "colored BAE"))
            for i, li in enumerate(rts)
            if i != j
        ]
        if log_form:
            out.append(log_residual([clog(n) - clog(d) for n, d in lhs], [clog(n) - clog(d) for n, d in rhs]))
        else:
            out.append(complex(np.prod([n / d for n, d in lhs]) - np.prod([n / d for n, d in rhs])))
    return out


def g1(spec: ColoredSpec, a: int, b: int) -> complex:
    eta, gb = spec.eta, spec.gammaBar
    out = 1 + 0j
    for l in range(1, b):
        r = (cmath.sinh(gb + 1j * eta * (a + l - 2)) / cmath.sinh(gb + 1j * eta * (a + b - 2))) * (
            cmath.sinh(1j * eta * (a + b - 1 - l)) / cmath.sinh(1j * eta * (a + b - 1))
        )
        out *= csqrt(r)
    return out


def g2(spec: ColoredSpec, a: int, b: int) -> complex:
    eta, gb = spec.eta, spec.gammaBar
    out = 1 + 0j
    for l in range(1, b):
        r = (cmath.sinh(gb + 1j * eta * (a + l - 1)) / cmath.sinh(gb + 1j * eta * (a - 1))) * (
            cmath.sinh(1j * eta * (a + b - l)) / cmath.sinh(1j * eta * a)
        )
        out *= csqrt(r)
    return out


def f01_colored(spec: ColoredSpec, a: int, lam, mu, tol: float = POLE_TOL) -> complex:
    eta, gb = spec.eta, spec.gammaBar
    lam, mu = complex(lam), complex(mu)
    num = csqrt(cmath.sinh(gb) * cmath.sinh(1j * eta * a) * cmath.sinh(gb + 1j * eta * (a - 1)))
    den = csqrt(cmath.sinh(1j * eta)) * guard(cmath.sinh(mu - lam - 1j * eta * (a - 1)), "colored F01", tol)
    return cmath.exp(mu - lam) * num / den


def f_closed_colored(spec: ColoredSpec, c: int, b: int, a: int, lam, rapidities, tol: float = POLE_TOL) -> complex:
    N, eta, gb = spec.N, spec.eta, spec.gammaBar
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
            pair *= cmath.sinh(x - gb) / guard(cmath.sinh(x + 1j * eta), "colored F pair", tol)
    if c == 0:
        G = g1(spec, a, b)
        single = np.prod([f01_colored(spec, a + b - 1, lam, r, tol) for r in rap])
    else:
        G = g2(spec, a, b)
        single = np.prod([-f01_colored(spec, a, lam, r, tol) for r in rap])
    return complex(G * pair * single)


def special_point(N: int, k: int) -> complex:
    return -(N - 1) * 1j * math.pi * k / N


def specialize_to_xxz(spec: ColoredSpec) -> tuple[ColoredSpec, XxzSpec]:
    """Move gbar to -(N-1) i pi k / N and return it with the matching XXZ(gamma = -pi k / N)."""
    sp = ColoredSpec(spec.N, spec.k, special_point(spec.N, spec.k))
    return sp, XxzSpec(spec.N, -math.pi * spec.k / spec.N, generic=False, cap=max(spec.N, 8))


def provider(spec: ColoredSpec) -> WeightProvider:
    N = spec.N

    def fn(lam, mu):
        return r_matrix_colored(spec, lam, mu).reshape(N, N, N, N)

    return WeightProvider(
        name=f"colored-N{N}-k{spec.k}",
        local_dim=N,
        tensor_fn=fn,
        theta_closed=lambda lam, mu: theta_colored(spec, lam, mu),
        additive=True,
        params={"family": "colored", "N": N, "k": spec.k, "gammaBar": spec.gammaBar, "period": 1j * math.pi},
    )
