"""Lattice kinetics of particle-hole excitations near a Fermi surface."""

from .conventions import DEFAULT, RAW, Conventions
from .lattice import LatticeContext
from .potential import Potential
from .states import Distribution, SlaterData

__version__ = "0.1.0"

__all__ = [
    "Conventions",
    "DEFAULT",
    "Distribution",
    "LatticeContext",
    "Potential",
    "RAW",
    "SlaterData",
    "__version__",
]
