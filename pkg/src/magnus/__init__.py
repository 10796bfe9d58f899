"""Exact tools for normal closures, conjugacy and the Magnus property.

Finite groups are handled through Cayley tables; the crystallographic
groups G (Hantzsche-Wendt) and G_p through integer lattices.
"""
from .crystal import make_gp, make_hw
from .finite import FiniteGroup
from .intlattice import Lattice, hnf

__version__ = "0.1.0"

__all__ = ["FiniteGroup", "Lattice", "hnf", "make_gp", "make_hw", "__version__"]
