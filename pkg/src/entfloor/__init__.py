"""Minimal entanglement compatible with partial measurement data."""

from .errors import ConvergenceError, InfeasibleError
from .floors import (
    FloorResult,
    floor_local_stats,
    floor_mutual_info,
    floor_purity_czz,
    floor_xx_yy_zz,
    floor_xx_zz,
)
from .multipartite import GhzDiagonal, TriData, min_e3, min_random_robustness
from .numeric import ConstraintSet, SolverOptions, min_entanglement_numeric

__all__ = [
    "ConvergenceError",
    "InfeasibleError",
    "FloorResult",
    "floor_xx_zz",
    "floor_xx_yy_zz",
    "floor_purity_czz",
    "floor_mutual_info",
    "floor_local_stats",
    "GhzDiagonal",
    "TriData",
    "min_e3",
    "min_random_robustness",
    "ConstraintSet",
    "SolverOptions",
    "min_entanglement_numeric",
]

__version__ = "0.1.0"
