"""Normalization and convention switches shared by every operator.

The fixed-volume box has side ``L = 2*pi`` so the dual lattice is ``Z^d``.
A lattice integral ``int dp`` is ``(2*pi)**-d * sum_p`` and a momentum delta
``delta(p - q)`` is ``(2*pi)**d * kron(p, q)``.  After every delta has been
resolved analytically the operators carry the following net factors, where
``mu = (2*pi)**-d`` is the integration measure:

===================  ==============================  =========================
quantity             ledger mode                     raw mode (``mu = 1``)
===================  ==============================  =========================
``(V * chi)(p)``     ``mu * sum_k``                  ``sum_k``
``Q_t[f](p)``        ``pi * mu**2 * sum``            ``pi * sum``
``Qsharp[f](p)``     ``pi * kappa * mu**2 * sum``    ``pi * kappa * sum``
``alpha_t(q, k)``    ``mu * sum_r``                  ``sum_r``
``B_t[f](q)``        ``2*pi * mu * sum_k alpha``     ``2*pi * sum_k alpha``
``Bsharp[f](q)``     ``2*pi*kappa * mu**2 * N``      ``2*pi*kappa * N``
``||f||_1``          ``mu * sum |f|``                ``sum |f|``
===================  ==============================  =========================

``kappa`` is the coefficient that replaces the mollifier at exact
resonance.  Every conservation law and every scaling slope is homogeneous in
``mu`` and ``kappa``, so tests run in raw mode whenever the absolute scale is
irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

NORMALIZATIONS = ("ledger", "raw")
KRONECKER_CONVENTIONS = ("consistent", "literal")
DISPERSIONS = ("full", "free")


@dataclass(frozen=True)
class Conventions:
    normalization: str = "ledger"
    kronecker: str = "consistent"
    dispersion: str = "full"

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if self.kronecker not in KRONECKER_CONVENTIONS:
            raise ValueError(f"kronecker convention must be one of {KRONECKER_CONVENTIONS}")
        if self.dispersion not in DISPERSIONS:
            raise ValueError(f"dispersion must be one of {DISPERSIONS}")

    def measure(self, d: int) -> float:
        """Weight of one lattice integral, ``(2 pi)^-d`` or 1."""
        if self.normalization == "raw":
            return 1.0
        return (2.0 * math.pi) ** (-d)

    def with_(self, **changes) -> "Conventions":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "normalization": self.normalization,
            "kronecker": self.kronecker,
            "dispersion": self.dispersion,
        }


DEFAULT = Conventions()
RAW = Conventions(normalization="raw")
