"""Radial weakly non-radiative solutions of the 5D energy-critical wave equation."""

from .grid_profile import SIGMA4, GridSpec, RadialProfile
from .freewave import RadialData, data_from_profile, evolve_free, profile_from_data
from .extsolve import ExteriorSolution, Nonlinearity, fd_oracle_solve, solve_exterior
from .fixpoint import FixpointConfig, iterate_to_fixed_point
from .charnum import CharNumbers, alpha_of, beta_relative

__all__ = [
    "SIGMA4",
    "GridSpec",
    "RadialProfile",
    "RadialData",
    "data_from_profile",
    "evolve_free",
    "profile_from_data",
    "ExteriorSolution",
    "Nonlinearity",
    "fd_oracle_solve",
    "solve_exterior",
    "FixpointConfig",
    "iterate_to_fixed_point",
    "CharNumbers",
    "alpha_of",
    "beta_relative",
]
