"""Types and guards shared by the model modules and the ABA engine."""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

POLE_TOL = 1e-8
ROOT_TOL = 1e-9


class PoleError(ZeroDivisionError):
    """A denominator factor came within the pole guard of zero."""

    def __init__(self, factor: complex, where: str = ""):
        msg = f"pole guard tripped: |{factor:.3e}| below tolerance"
        if where:
            msg += f" in {where}"
        super().__init__(msg)
        self.factor = factor


class CoincidentRootsError(ValueError):
    pass


def guard(x: complex, where: str = "", tol: float = POLE_TOL) -> complex:
    if abs(x) < tol:
        raise PoleError(x, where)
    return x


def csqrt(z: complex) -> complex:
    """Principal square root of a complex number."""
    return cmath.sqrt(complex(z))


def parse_complex(s) -> complex:
    """Parse ``"re+imi"`` / ``"re+imj"`` / plain numbers into a complex."""
    if isinstance(s, (int, float, complex)):
        return complex(s)
    t = str(s).strip().replace(" ", "").replace("i", "j")
    return complex(t)


@dataclass(frozen=True)
class Lattice:
    """An L-site row with horizontal inhomogeneities mu_1..mu_L."""

    inhomogeneities: tuple[complex, ...]

    def __post_init__(self):
        mus = tuple(complex(m) for m in self.inhomogeneities)
        if len(mus) < 1:
            raise ValueError("lattice needs L >= 1")
        if not all(np.isfinite(m) for m in mus):
            raise ValueError("inhomogeneities must be finite")
        object.__setattr__(self, "inhomogeneities", mus)

    @classmethod
    def homogeneous(cls, L: int, mu: complex = 0.0) -> "Lattice":
        return cls(tuple([mu] * L))

    @property
    def L(self) -> int:
        return len(self.inhomogeneities)

    @property
    def mus(self) -> tuple[complex, ...]:
        return self.inhomogeneities


@dataclass(frozen=True)
class BetheRoots:
    roots: tuple[complex, ...]
    residuals: tuple[float, ...] = ()
    converged: bool = False
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(complex(r) for r in self.roots))

    @property
    def n(self) -> int:
        return len(self.roots)


def as_roots(roots) -> tuple[complex, ...]:
    if isinstance(roots, BetheRoots):
        return roots.roots
    return tuple(complex(r) for r in roots)


def check_distinct(roots: Sequence[complex], tol: float = ROOT_TOL):
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < tol:
                raise CoincidentRootsError(f"roots {i} and {j} coincide: {roots[i]}")


def log_residual(lhs_logs: Iterable[complex], rhs_logs: Iterable[complex]) -> complex:
    """sum(lhs) - sum(rhs) folded onto the principal strip by nearest 2*pi*i multiple."""
    d = sum(lhs_logs, 0j) - sum(rhs_logs, 0j)
    k = round(d.imag / (2 * np.pi))
    return complex(d.real, d.imag - 2 * np.pi * k)


def clog(z: complex) -> complex:
    return cmath.log(complex(z))
