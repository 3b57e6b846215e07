"""The weight-provider contract every model exposes to the ABA engine."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class WeightProvider:
    """Boltzmann weights R(lam, mu)_{a,b}^{c,d} of one model instance.

    ``tensor_fn(lam, mu)`` returns the weight array indexed
    ``[a-1, b-1, c-1, d-1]`` on a square ``local_dim`` truncation; reshaping it
    to ``(N*N, N*N)`` gives the R-matrix in the ``e_{a,c} (x) e_{b,d}``
    convention.

    Non-compact models set ``compact=False``.  For them ``local_dim`` is only
    the default truncation, ``weight_fn`` serves single weights with any
    indices, and ``site_fn(lam, mu, na, nq)`` returns the rectangular
    ``[na, nq, na, nq]`` slice used by the monodromy (auxiliary indices a, c
    up to ``na``, quantum indices b, d up to ``nq``).

    ``sector_cap`` marks where table-backed weights stop: only weights with
    ``a + b - 2 <= sector_cap`` are guaranteed by the model's tables.
    """

    name: str
    local_dim: int
    tensor_fn: Callable[[complex, complex], np.ndarray]
    theta_closed: Optional[Callable[[complex, complex], complex]] = None
    sector_cap: Optional[int] = None
    additive: bool = True
    compact: bool = True
    weight_fn: Optional[Callable[..., complex]] = None
    site_fn: Optional[Callable[..., np.ndarray]] = None
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def tensor(self, lam, mu) -> np.ndarray:
        return self.tensor_fn(complex(lam), complex(mu))

    def weight(self, lam, mu, a: int, b: int, c: int, d: int) -> complex:
        if min(a, b, c, d) < 1:
            raise IndexError("weight indices start at 1")
        if self.weight_fn is not None:
            return complex(self.weight_fn(complex(lam), complex(mu), a, b, c, d))
        N = self.local_dim
        if max(a, b, c, d) > N:
            raise IndexError(f"weight index out of range 1..{N}")
        return complex(self.tensor(lam, mu)[a - 1, b - 1, c - 1, d - 1])

    def site(self, lam, mu, na: Optional[int] = None, nq: Optional[int] = None) -> np.ndarray:
        """Weights ``[na, nq, na, nq]`` for one lattice site."""
        N = self.local_dim
        na = N if na is None else na
        nq = N if nq is None else nq
        if self.site_fn is not None:
            return self.site_fn(complex(lam), complex(mu), na, nq)
        if na > N or nq > N:
            raise IndexError(f"site dimensions ({na}, {nq}) exceed local_dim {N}")
        return self.tensor(lam, mu)[:na, :nq, :na, :nq]

    def matrix(self, lam, mu) -> np.ndarray:
        N = self.local_dim
        return self.tensor(lam, mu).reshape(N * N, N * N)

    def perturbed(self, index: tuple[int, int, int, int], eps: float = 1e-6) -> "WeightProvider":
        """Copy of this provider with ``eps`` added to one weight (sensitivity control)."""
        a, b, c, d = (i - 1 for i in index)
        base = self.tensor_fn

        def fn(lam, mu):
            t = np.array(base(lam, mu), dtype=complex, copy=True)
            t[a, b, c, d] += eps
            return t

        return WeightProvider(
            name=self.name + "+perturbed",
            local_dim=self.local_dim,
            tensor_fn=fn,
            theta_closed=self.theta_closed,
            sector_cap=self.sector_cap,
            additive=self.additive,
            params=dict(self.params),
        )


def identity_provider(N: int) -> WeightProvider:
    """R = P, the trivially integrable permutation solution (unitarity control)."""
    t = np.zeros((N, N, N, N), dtype=complex)
    for a in range(N):
        for b in range(N):
            t[a, b, b, a] = 1.0
    t.setflags(write=False)
    return WeightProvider(name=f"permutation-N{N}", local_dim=N, tensor_fn=lambda lam, mu: t)
