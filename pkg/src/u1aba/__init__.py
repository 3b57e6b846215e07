"""Algebraic Bethe ansatz for U(1)-invariant vertex models.

Model modules (:mod:`~u1aba.xxz`, :mod:`~u1aba.colored`,
:mod:`~u1aba.nonadditive`, :mod:`~u1aba.sl2r`) expose their weights through a
:class:`~u1aba.provider.WeightProvider`; :mod:`~u1aba.aba` builds monodromy
and transfer matrices, off-shell amplitudes and Bethe states from any
provider, and :mod:`~u1aba.verify` certifies the integrability identities.
"""
from .common import BetheRoots, CoincidentRootsError, Lattice, PoleError
from .kernels import BACKEND
from .provider import WeightProvider

__version__ = "0.1.0"

__all__ = ["BACKEND", "BetheRoots", "CoincidentRootsError", "Lattice", "PoleError", "WeightProvider", "__version__"]
