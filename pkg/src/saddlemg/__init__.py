"""Multigrid for structured saddle-point systems after an L·𝒜·U transformation.

Circulant and Toeplitz blocks generated by trigonometric polynomials, symbol
based coarsening, two-grid / V / W cycles with damped Jacobi post-smoothing,
and the symbol-level convergence analysis that selects ω.
"""

from .analysis import TheoryReport, analyze, check_hypotheses, gamma_bounds, kappa_bound, mu_bound, omega_opt
from .circulant import CirculantOp, GridTransfer, circulant_transfer
from .hierarchy import Hierarchy, HypothesisError, Level, build_hierarchy, coarsen_level
from .saddle import SaddleSystem, hatC_symbol
from .solver import CycleSpec, DivergenceError, SolveReport, solve
from .symbol import SymbolZero, TrigPoly, Unbounded, galerkin_coarse_symbol, psi_coarsen, ratio_sup, sup_norm
from .toeplitz import BandMatrix, ToeplitzOp, galerkin_band, tau_transfer

__version__ = "0.1.0"

__all__ = [
    "BandMatrix", "CirculantOp", "CycleSpec", "DivergenceError", "GridTransfer",
    "Hierarchy", "HypothesisError", "Level", "SaddleSystem", "SolveReport",
    "SymbolZero", "TheoryReport", "ToeplitzOp", "TrigPoly", "Unbounded",
    "analyze", "build_hierarchy", "check_hypotheses", "circulant_transfer",
    "coarsen_level", "galerkin_band", "galerkin_coarse_symbol", "gamma_bounds",
    "hatC_symbol", "kappa_bound", "mu_bound", "omega_opt", "psi_coarsen",
    "ratio_sup", "solve", "sup_norm", "tau_transfer",
]
