"""Model-independent algebraic Bethe ansatz for U(1)-invariant vertex models.

Everything here is expressed through a :class:`~u1aba.provider.WeightProvider`:
monodromy and transfer matrices, the pseudo-vacuum data ``omega_a``, the
two-body functions ``theta`` and ``P_a``, the off-shell amplitudes
``cF_b^(a)`` from their recurrences, the ``H`` amplitudes of the unwanted
terms, the Bethe states ``phi_n`` and the on-/off-shell checks.

Rapidities passed to the recurrences are ``(label, value)`` pairs.  The
ordering factor ``theta_<(lam_i, lam_j)`` compares labels.
"""
from __future__ import annotations

import cmath
import itertools
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .common import (
    BetheRoots,
    CoincidentRootsError,
    Lattice,
    POLE_TOL,
    PoleError,
    as_roots,
    check_distinct,
    clog,
    guard,
    log_residual,
)
from .kernels import path_sum
from .provider import WeightProvider
from .tensor import DIM_CAP, DimensionError

DEFAULT_AUX_CAP = 40


# ---------------------------------------------------------------- monodromy


@dataclass(frozen=True)
class Monodromy:
    """Entries ``<b|T_{a,c}(lam)|d>`` stored as ``entries[a-1, c-1]`` (D x D each)."""

    lam: complex
    entries: np.ndarray
    nq: int
    L: int

    def op(self, a: int, c: int) -> np.ndarray:
        na = self.entries.shape[0]
        if not (1 <= a <= na and 1 <= c <= na):
            raise IndexError(f"monodromy index ({a}, {c}) outside 1..{na}")
        return self.entries[a - 1, c - 1]

    @property
    def aux_dim(self) -> int:
        return self.entries.shape[0]


def charges(nq: int, L: int) -> np.ndarray:
    """Total charge sum_l (b_l - 1) of each basis state, site 1 most significant."""
    dig = np.array(np.unravel_index(np.arange(nq**L), (nq,) * L))
    return dig.sum(axis=0)


def reference_state(provider: WeightProvider, lattice: Lattice, nq: Optional[int] = None) -> np.ndarray:
    nq = provider.local_dim if nq is None else nq
    v = np.zeros(nq**lattice.L, dtype=complex)
    v[0] = 1.0
    return v


def _dims(provider: WeightProvider, nq, na):
    if provider.compact:
        N = provider.local_dim
        return (N if nq is None else nq), (N if na is None else na)
    if nq is None or na is None:
        raise ValueError("non-compact provider needs explicit quantum (nq) and auxiliary (na) dimensions")
    return nq, na


def monodromy(
    provider: WeightProvider,
    lattice: Lattice,
    lam,
    nq: Optional[int] = None,
    na: Optional[int] = None,
    cap: int = DIM_CAP,
) -> Monodromy:
    """T_A(lam) = L_L ... L_1 with L_i = sum R(lam, mu_i)_{a,b}^{c,d} e_{a,c} (x) e^{(i)}_{b,d}."""
    nq, na = _dims(provider, nq, na)
    D = nq**lattice.L
    if D > cap:
        raise DimensionError(f"quantum dimension {D} exceeds cap {cap}")
    W = np.stack([provider.site(lam, mu, na, nq) for mu in lattice.mus])
    return Monodromy(complex(lam), path_sum(W), nq, lattice.L)


@dataclass(frozen=True)
class TransferOperator:
    lam: complex
    matrix: np.ndarray
    charge: np.ndarray

    @property
    def sector_blocks(self) -> dict[int, np.ndarray]:
        return {int(n): self.block(int(n)) for n in np.unique(self.charge)}

    def sector_indices(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.charge == n)

    def block(self, n: int) -> np.ndarray:
        idx = self.sector_indices(n)
        return self.matrix[np.ix_(idx, idx)]

    def off_block_mass(self) -> float:
        mask = self.charge[:, None] != self.charge[None, :]
        return float(np.abs(self.matrix[mask]).max(initial=0.0))


def transfer(
    provider: WeightProvider,
    lattice: Lattice,
    lam,
    nq: Optional[int] = None,
    aux_cap: Optional[int] = None,
) -> TransferOperator:
    """T(lam) = sum_a T_{a,a}(lam), split by total charge.

    For a non-compact provider the auxiliary trace is truncated at
    ``a <= aux_cap`` while the auxiliary space is kept ``nq - 1`` states
    larger so every retained diagonal entry is exact.
    """
    if provider.compact:
        mono = monodromy(provider, lattice, lam, nq=nq)
        A = mono.aux_dim
    else:
        A = DEFAULT_AUX_CAP if aux_cap is None else aux_cap
        mono = monodromy(provider, lattice, lam, nq=nq, na=A + nq - 1)
    T = sum(mono.entries[a, a] for a in range(A))
    return TransferOperator(complex(lam), T, charges(mono.nq, lattice.L))


# ---------------------------------------------------------------- engine


def _subsets(items: Sequence, k: int):
    """(chosen, rest) pairs over all k-subsets, both keeping the input order."""
    n = len(items)
    for idx in itertools.combinations(range(n), k):
        s = set(idx)
        yield tuple(items[i] for i in idx), tuple(items[i] for i in range(n) if i not in s)


def _labelled(values) -> tuple[tuple[int, complex], ...]:
    return tuple((i + 1, complex(v)) for i, v in enumerate(values))


class AbaContext:
    """One evaluation context: a provider, an optional lattice and memo tables.

    Not shared across threads; build one per worker.
    """

    def __init__(
        self,
        provider: WeightProvider,
        lattice: Optional[Lattice] = None,
        aux_cap: Optional[int] = None,
        tol: float = POLE_TOL,
    ):
        self.provider = provider
        self.lattice = lattice
        self.tol = tol
        self.N = provider.local_dim if provider.compact else None
        self.aux_cap = aux_cap if aux_cap is not None else (self.N or DEFAULT_AUX_CAP)
        self._tensors: dict = {}
        self._F: dict = {}
        self._mono: dict = {}
        self._phi: dict = {}

    # weights -------------------------------------------------------------
    def w(self, lam, mu, a, b, c, d) -> complex:
        p = self.provider
        if p.weight_fn is not None:
            return p.weight(lam, mu, a, b, c, d)
        key = (complex(lam), complex(mu))
        t = self._tensors.get(key)
        if t is None:
            t = p.tensor(*key)
            self._tensors[key] = t
        N = t.shape[0]
        if max(a, b, c, d) > N:
            raise IndexError(f"weight index outside 1..{N}")
        return complex(t[a - 1, b - 1, c - 1, d - 1])

    def rho(self, lam, mu) -> complex:
        """R(lam, mu)_{1,1}^{1,1} / R(lam, mu)_{2,1}^{2,1}."""
        return self.w(lam, mu, 1, 1, 1, 1) / guard(self.w(lam, mu, 2, 1, 2, 1), "R_{2,1}^{2,1}", self.tol)

    def theta(self, lam, mu) -> complex:
        if self.N == 2:
            if self.provider.theta_closed is None:
                raise ValueError("two-state provider needs a closed-form theta")
            return complex(self.provider.theta_closed(complex(lam), complex(mu)))
        w = lambda *i: self.w(lam, mu, *i)
        det = w(2, 2, 2, 2) * w(3, 1, 3, 1) - w(3, 1, 2, 2) * w(2, 2, 3, 1)
        return det / guard(w(1, 1, 1, 1), "theta", self.tol) / guard(w(3, 1, 3, 1), "theta", self.tol)

    def theta_lt(self, i: int, j: int, lami, lamj) -> complex:
        return self.theta(lami, lamj) if i < j else 1.0 + 0j

    # pseudo-vacuum -------------------------------------------------------
    def omega(self, a: int, lam) -> complex:
        if self.lattice is None:
            raise ValueError("omega needs a lattice")
        out = 1 + 0j
        for mu in self.lattice.mus:
            out *= self.w(lam, mu, a, 1, a, 1)
        return out

    def p_a(self, a: int, lam, mu) -> complex:
        N = self.N
        if a < 1 or (N is not None and a > N):
            raise IndexError(f"P_a index {a} out of range")
        if a == 1:
            return self.rho(mu, lam)
        w = lambda *i: self.w(lam, mu, *i)
        if N is not None and a == N:
            return w(N, 2, N, 2) / guard(w(N, 1, N, 1), "P_N", self.tol)
        det = w(a, 2, a, 2) * w(a + 1, 1, a + 1, 1) - w(a + 1, 1, a, 2) * w(a, 2, a + 1, 1)
        return det / guard(w(a, 1, a, 1), "P_a", self.tol) / guard(w(a + 1, 1, a + 1, 1), "P_a", self.tol)

    # off-shell amplitudes ------------------------------------------------
    def f_initial(self, a: int, lam, mu) -> complex:
        return self.w(lam, mu, a + 1, 1, a, 2) / guard(self.w(lam, mu, a + 1, 1, a + 1, 1), "F initial", self.tol)

    def F(self, c: int, b: int, a: int, lam, raps) -> complex:
        """cF_b^(a)(lam, raps) from the recurrences; ``raps`` are (label, value) pairs."""
        raps = tuple((int(l), complex(v)) for l, v in raps)
        if len(raps) != b:
            raise ValueError(f"F needs {b} rapidities, got {len(raps)}")
        if not 0 <= c <= b:
            raise ValueError(f"c={c} outside 0..{b}")
        if b == 0:
            return 1 + 0j
        if a < 1 or (self.N is not None and a + b > self.N):
            raise ValueError(f"(b, a) = ({b}, {a}) outside 1 <= a <= N - b")
        key = (c, b, a, complex(lam), raps)
        hit = self._F.get(key)
        if hit is not None:
            return hit
        lam = complex(lam)
        if b == 1:
            v = self.f_initial(a, lam, raps[0][1])
            val = v if c == 0 else -v
        elif 0 < c < b:
            val = self._f_mid(c, b, a, lam, raps)
        elif c == 0:
            val = self._f_zero(b, a, lam, raps)
        else:
            val = self._f_full(b, a, lam, raps)
        self._F[key] = val
        return val

    def _f_mid(self, c, b, a, lam, raps):
        head, tail = raps[:c], raps[c:]
        out = self.F(0, b - c, a, lam, tail) * self.F(c, c, a + b - c, lam, head)
        for _, vi in tail:
            for _, vj in head:
                out *= self.rho(vi, vj)
        return out

    def _f_zero(self, b, a, lam, raps):
        (l1, v1), rest = raps[0], raps[1:]
        den = guard(self.w(lam, v1, a + b, 1, a + b, 1), "F recurrence", self.tol)
        total = 0j
        for e in range(1, b + 1):
            coef = self.w(lam, v1, a + e, 1, a, 1 + e) / den
            if coef == 0:
                continue
            for A, B in _subsets(rest, b - e):
                term = self.F(0, b - e, a + e, lam, A) * self.F(e - 1, e - 1, 2, v1, B)
                for la, va in A:
                    for lb, vb in B:
                        term *= self.rho(va, vb) * self.theta_lt(la, lb, va, vb)
                total += coef * term
        return total

    def _f_full(self, b, a, lam, raps):
        total = 0j
        for f in range(b):
            for lset, keep in _subsets(raps, b - f):
                term = self.F(f, b, a, lam, keep + lset)
                for ls, vs in lset:
                    for li, vi in keep:
                        term *= self.theta_lt(li, ls, vi, vs) * self.rho(vi, vs) / self.rho(vs, vi)
                total += term
        return -total

    # unwanted-term amplitudes --------------------------------------------
    def H(self, P, Q, rest) -> complex:
        """pH_t^(n) for the p-set ``P``, the (t-p)-set ``Q`` and the remaining roots."""
        w1 = lambda v: self.omega(1, v)
        w2 = lambda v: self.omega(2, v)
        out = 1 + 0j
        for ls, vs in P:
            out *= w1(vs)
            for li, vi in rest:
                out *= self.rho(vi, vs) * self.theta_lt(li, ls, vi, vs)
        for lr, vr in Q:
            for ls, vs in P:
                out *= self.theta_lt(ls, lr, vs, vr)
            for li, vi in rest:
                out *= self.theta_lt(li, lr, vi, vr)
        plus = 1 + 0j
        minus = 1 + 0j
        for lr, vr in Q:
            plus *= w2(vr)
            minus *= w1(vr)
            for _, vi in rest:
                plus *= self.rho(vr, vi) * self.theta(vr, vi)
                minus *= self.rho(vi, vr)
            for _, vs in P:
                plus *= self.theta(vr, vs)
                minus *= self.rho(vs, vr) / self.rho(vr, vs)
        return out * (plus - minus)

    # states --------------------------------------------------------------
    def _nq_for(self, n: int) -> int:
        return self.N if self.N is not None else n + 1

    def mono(self, lam, nq: int, na: int) -> Monodromy:
        key = (complex(lam), nq, na)
        m = self._mono.get(key)
        if m is None:
            m = monodromy(self.provider, self.lattice, lam, nq=nq, na=na)
            self._mono[key] = m
        return m

    def phi(self, raps, nq: int) -> np.ndarray:
        """phi_n(raps)|0> on the quantum space with local dimension ``nq``."""
        raps = tuple((int(l), complex(v)) for l, v in raps)
        key = (raps, nq)
        hit = self._phi.get(key)
        if hit is not None:
            return hit
        n = len(raps)
        if n == 0:
            v = np.zeros(nq**self.lattice.L, dtype=complex)
            v[0] = 1.0
            self._phi[key] = v
            return v
        (l1, v1), rest = raps[0], raps[1:]
        emax = n if self.N is None else min(n, self.N - 1)
        na = (self.N if self.N is not None else n + 1)
        M = self.mono(v1, nq, na)
        out = np.zeros(nq**self.lattice.L, dtype=complex)
        for e in range(1, emax + 1):
            acc = np.zeros_like(out)
            for B, A in _subsets(rest, e - 1):
                coef = self.F(e - 1, e - 1, 2, v1, B)
                for lb, vb in B:
                    coef *= self.omega(1, vb)
                    for la, va in A:
                        coef *= self.rho(va, vb) * self.theta_lt(la, lb, va, vb)
                if coef != 0:
                    acc += coef * self.phi(A, nq)
            out += M.op(1, 1 + e) @ acc
        self._phi[key] = out
        return out

    # on-shell ------------------------------------------------------------
    def eigenvalue(self, roots, lam) -> complex:
        rts = as_roots(roots)
        amax = self.N if self.N is not None else self.aux_cap
        total = 0j
        for a in range(1, amax + 1):
            term = self.omega(a, lam)
            for r in rts:
                term *= self.p_a(a, lam, r)
            total += term
        return total

    def bae_logs(self, roots) -> list[complex]:
        rts = as_roots(roots)
        out = []
        for j, lj in enumerate(rts):
            lhs = [clog(self.omega(1, lj)), -clog(guard(self.omega(2, lj), "omega_2", self.tol))]
            rhs = []
            for i, li in enumerate(rts):
                if i == j:
                    continue
                rhs += [clog(self.theta(lj, li)), clog(self.rho(lj, li)), -clog(self.rho(li, lj))]
            out.append(log_residual(lhs, rhs))
        return out

    # off-shell structure ---------------------------------------------------
    def decomposition(self, roots, lam, aux_cap: Optional[int] = None):
        """Both sides of T(lam)|Phi_n> = wanted + unwanted terms.

        Returns ``(lhs, rhs)`` vectors.
        """
        rts = _labelled(as_roots(roots))
        n = len(rts)
        lam = complex(lam)
        nq = self._nq_for(n)
        phi = self.phi(rts, nq)
        if self.N is not None:
            A = self.N
            M = self.mono(lam, nq, self.N)
        else:
            A = self.aux_cap if aux_cap is None else aux_cap
            M = self.mono(lam, nq, A + nq - 1)
        T = sum(M.entries[a, a] for a in range(A))
        lhs = T @ phi
        lam_val = 0j
        for a in range(1, A + 1):
            term = self.omega(a, lam)
            for _, r in rts:
                term *= self.p_a(a, lam, r)
            lam_val += term
        rhs = lam_val * phi
        for t in range(1, n + 1):
            amax = A if self.N is None else self.N - t
            for a in range(1, amax + 1):
                acc = np.zeros_like(phi)
                for p in range(t):
                    for J, rest in _subsets(rts, t):
                        for P, Q in _subsets(J, p):
                            f = self.F(p, t, a, lam, P + Q)
                            if f == 0:
                                continue
                            h = self.H(P, Q, rest)
                            acc += f * h * self.phi(rest, nq)
                if self.N is None and a + t > M.aux_dim:
                    continue
                rhs = rhs - M.op(a, a + t) @ acc
        return lhs, rhs


# ---------------------------------------------------------------- public API


def omega_a(provider: WeightProvider, lattice: Lattice, a: int, lam) -> complex:
    return AbaContext(provider, lattice).omega(a, lam)


def theta(provider: WeightProvider, lam, mu) -> complex:
    return AbaContext(provider).theta(lam, mu)


def theta_lt(provider: WeightProvider, i: int, j: int, lami, lamj) -> complex:
    return AbaContext(provider).theta_lt(i, j, lami, lamj)


def p_a(provider: WeightProvider, a: int, lam, mu) -> complex:
    return AbaContext(provider).p_a(a, lam, mu)


def f_initial(provider: WeightProvider, a: int, lam, mu) -> complex:
    return AbaContext(provider).f_initial(a, lam, mu)


def f_recur(provider: WeightProvider, c: int, b: int, a: int, lam, rapidities, ctx: Optional[AbaContext] = None) -> complex:
    ctx = ctx or AbaContext(provider)
    return ctx.F(c, b, a, lam, _labelled(rapidities))


def q_function(provider: WeightProvider, lam, mu) -> complex:
    """Q(lam, mu) = theta(lam, mu) rho(lam, mu) + rho(mu, lam)."""
    ctx = AbaContext(provider)
    return ctx.theta(lam, mu) * ctx.rho(lam, mu) + ctx.rho(mu, lam)


def h_amp(provider: WeightProvider, lattice: Lattice, p: int, t: int, selected: Sequence[int], roots) -> complex:
    """pH_t^(n) with ``selected`` the 1-based labels (j_1..j_p, j_{p+1}..j_t)."""
    rts = _labelled(as_roots(roots))
    sel = list(selected)
    if len(sel) != t or len(set(sel)) != t or not 0 <= p <= t:
        raise ValueError("selected must list t distinct labels with 0 <= p <= t")
    if sorted(sel[:p]) != sel[:p] or sorted(sel[p:]) != sel[p:]:
        raise ValueError("both label groups must be increasing")
    by = dict(rts)
    P = tuple((l, by[l]) for l in sel[:p])
    Q = tuple((l, by[l]) for l in sel[p:])
    rest = tuple(r for r in rts if r[0] not in sel)
    return AbaContext(provider, lattice).H(P, Q, rest)


def phi_state(provider: WeightProvider, lattice: Lattice, roots, nq: Optional[int] = None) -> np.ndarray:
    ctx = AbaContext(provider, lattice)
    rts = _labelled(as_roots(roots))
    return ctx.phi(rts, nq or ctx._nq_for(len(rts)))


def eigenvalue_generic(provider: WeightProvider, lattice: Lattice, roots, lam, aux_cap: Optional[int] = None) -> complex:
    rts = as_roots(roots)
    check_distinct(rts)
    return AbaContext(provider, lattice, aux_cap=aux_cap).eigenvalue(rts, lam)


def bae_generic(provider: WeightProvider, lattice: Lattice, roots) -> list[complex]:
    rts = as_roots(roots)
    check_distinct(rts)
    return AbaContext(provider, lattice).bae_logs(rts)


def offshell_decomposition_check(provider: WeightProvider, lattice: Lattice, roots, lam, aux_cap: Optional[int] = None) -> float:
    """Relative residual ||T|Phi> - (wanted - unwanted)|| / ||T|Phi>||."""
    rts = as_roots(roots)
    check_distinct(rts)
    ctx = AbaContext(provider, lattice, aux_cap=aux_cap)
    lhs, rhs = ctx.decomposition(rts, lam, aux_cap=aux_cap)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300))


def eigen_residual(provider: WeightProvider, lattice: Lattice, roots, lam, aux_cap: Optional[int] = None) -> tuple[complex, float]:
    """(Lambda_n(lam), ||T|Phi> - Lambda|Phi>|| / |||Phi>||) for the given roots."""
    rts = as_roots(roots)
    ctx = AbaContext(provider, lattice, aux_cap=aux_cap)
    lab = _labelled(rts)
    nq = ctx._nq_for(len(rts))
    phi = ctx.phi(lab, nq)
    T = transfer(provider, lattice, lam, nq=nq, aux_cap=aux_cap).matrix
    ev = ctx.eigenvalue(rts, lam)
    res = np.linalg.norm(T @ phi - ev * phi) / max(np.linalg.norm(phi), 1e-300)
    return ev, float(res)


@dataclass(frozen=True)
class AmplitudeTable:
    lam: complex
    rapidities: tuple[complex, ...]
    entries: dict
    source: str

    def __getitem__(self, key):
        return self.entries[key]


def amplitude_table(provider: WeightProvider, lam, rapidities, bmax: Optional[int] = None, amax: Optional[int] = None) -> AmplitudeTable:
    """Every reachable recurrence amplitude cF_b^(a)(lam, lam_1..lam_b) for b <= bmax.

    The amplitude of order b uses the first b rapidities.
    """
    rap = tuple(complex(r) for r in rapidities)
    ctx = AbaContext(provider)
    N = ctx.N
    bmax = len(rap) if bmax is None else bmax
    if N is not None:
        bmax = min(bmax, N - 1)
    out = {}
    for b in range(1, bmax + 1):
        top = (N - b) if N is not None else (amax or 3)
        for a in range(1, top + 1):
            for c in range(b + 1):
                out[(c, b, a)] = ctx.F(c, b, a, lam, _labelled(rap[:b]))
    return AmplitudeTable(complex(lam), rap, out, "recurrence")


# ---------------------------------------------------------------- BAE solver


@dataclass(frozen=True)
class SolveReport:
    solutions: tuple[BetheRoots, ...]
    attempts: int
    failures: int
    elapsed: float
    singular: int = 0


def _canon(roots, period):
    vals = []
    for r in roots:
        r = complex(r)
        if period is not None:
            p = abs(period)
            im = (r.imag + p / 2) % p - p / 2
            r = complex(r.real, im)
        vals.append(r)
    return tuple(sorted(vals, key=lambda z: (round(z.real, 7), round(z.imag, 7))))


def _same(a, b, tol, period):
    for x, y in zip(a, b):
        d = x - y
        if period is not None:
            p = abs(period)
            k = round(d.imag / p)
            d = complex(d.real, d.imag - k * p)
        if abs(d) > tol:
            return False
    return True


def _newton(fun, x0, tol, max_iter=200, h=1e-7):
    x = np.array(x0, dtype=complex)
    n = len(x)
    try:
        r = np.array(fun(x))
    except (PoleError, ZeroDivisionError, CoincidentRootsError, ValueError, OverflowError):
        return x, np.inf
    for _ in range(max_iter):
        nr = np.abs(r).max()
        if nr <= tol:
            return x, nr
        J = np.empty((n, n), dtype=complex)
        try:
            for k in range(n):
                xp = x.copy()
                xp[k] += h
                xm = x.copy()
                xm[k] -= h
                J[:, k] = (np.array(fun(xp)) - np.array(fun(xm))) / (2 * h)
            step = np.linalg.solve(J, -r)
        except (PoleError, ZeroDivisionError, CoincidentRootsError, ValueError, OverflowError, np.linalg.LinAlgError):
            return x, np.inf
        # damped line search: halve the step until the residual drops
        t = 1.0
        while t > 1e-4:
            try:
                xn = x + t * step
                rn = np.array(fun(xn))
                if np.abs(rn).max() < nr:
                    break
            except (PoleError, ZeroDivisionError, CoincidentRootsError, ValueError, OverflowError):
                pass
            t *= 0.5
        else:
            return x, nr
        x, r = xn, rn
    return x, float(np.abs(r).max())


def solve_bae(
    provider: WeightProvider,
    lattice: Lattice,
    n: int,
    seeds: Optional[Sequence[Sequence[complex]]] = None,
    n_random: int = 20,
    rng: Optional[np.random.Generator] = None,
    tol: float = 1e-9,
    residual_fn=None,
    period: Optional[complex] = None,
    bound: float = 25.0,
    state_tol: Optional[float] = 1e-8,
) -> SolveReport:
    """Solve the Bethe equations by damped Newton from a list of seeds.

    ``residual_fn(roots)`` defaults to the generic log-form residuals built
    from the provider's weights.  Converged sets are deduplicated up to
    permutation (and up to ``period`` shifts of single roots when given).
    Non-convergence is reported, never raised.

    With ``state_tol`` set (compact providers), root sets whose Bethe vector
    vanishes are counted as ``singular`` and dropped: the norm of phi_n is
    compared with the product over roots of max(|omega_1|, |omega_2|), the
    scale of each creation operator on the vacuum.  This removes roots
    escaping to infinity and roots pinned at degenerate points of the weights.
    """
    if n < 1:
        raise ValueError("solve_bae needs n >= 1")
    rng = rng or np.random.default_rng(0)
    ctx = AbaContext(provider, lattice)
    if residual_fn is None:
        def residual_fn(x):
            check_distinct(list(x))
            return ctx.bae_logs(list(x))
    period = period if period is not None else provider.params.get("period")
    seed_list = [list(s) for s in (seeds or [])]
    for _ in range(n_random):
        seed_list.append(list(rng.normal(0, 0.8, n) + 1j * rng.normal(0, 0.8, n)))
    t0 = time.perf_counter()
    found: list[BetheRoots] = []
    failures = 0
    singular = 0
    nq = ctx._nq_for(n)
    for s in seed_list:
        x, res = _newton(residual_fn, s, tol)
        ok = np.isfinite(res) and res <= tol and np.all(np.abs(x) < bound)
        if ok:
            try:
                check_distinct(list(x))
            except CoincidentRootsError:
                ok = False
        if not ok:
            failures += 1
            continue
        c = _canon(x, period)
        if any(_same(c, f.roots, 1e-7, period) for f in found):
            continue
        if state_tol is not None and provider.compact:
            scale = np.prod([max(abs(ctx.omega(1, r)), abs(ctx.omega(2, r))) for r in c])
            if np.linalg.norm(ctx.phi(_labelled(c), nq)) < state_tol * scale:
                singular += 1
                continue
        resid = tuple(float(abs(v)) for v in residual_fn(np.array(c)))
        found.append(BetheRoots(c, resid, True, {"seed": [complex(v) for v in s]}))
    return SolveReport(tuple(found), len(seed_list), failures, time.perf_counter() - t0, singular)
