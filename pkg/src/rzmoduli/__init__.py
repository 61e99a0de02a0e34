"""Exact computations with Dieudonné lattices in isocrystals of p-divisible groups."""

from .errors import *  # noqa: F401,F403
from .padic import FiniteField, FFElement, WittRing, WittElement, teichmuller, digits, subfield_linear_independent
from .isocrystal import IsocrystalShape, IsoVector, random_condition_star
from .combinatorics import (Cycle, PavingProfile, Pi0Descriptor, SemiModule, cycle_from_semimodule,
                            dim_formula, dim_rho_formula, dimension, enumerate_cycles, height_reachability,
                            paving_profile, pi0_descriptor, semimodule_from_cycle, smoothness)

__all__ = [
    "FiniteField", "FFElement", "WittRing", "WittElement", "teichmuller", "digits",
    "subfield_linear_independent", "IsocrystalShape", "IsoVector", "random_condition_star",
    "Cycle", "PavingProfile", "Pi0Descriptor", "SemiModule", "cycle_from_semimodule",
    "dim_formula", "dim_rho_formula", "dimension", "enumerate_cycles", "height_reachability",
    "paving_profile", "pi0_descriptor", "semimodule_from_cycle", "smoothness",
]
