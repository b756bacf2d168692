"""Lauricella F_A evaluation and the explicit solution of a mixed boundary value
problem for an elliptic equation with several singular coefficients in a quarter ball."""
from .hyperfun import FAParams, fa, fa_direct, gauss_2f1, kummer_1f1
from .fundsol import ProblemConfig, green_G_k, q_k
from .solver import BoundaryData, make_family, solve, solve_grid

__version__ = "0.1.0"

__all__ = [
    "FAParams",
    "fa",
    "fa_direct",
    "gauss_2f1",
    "kummer_1f1",
    "ProblemConfig",
    "q_k",
    "green_G_k",
    "BoundaryData",
    "make_family",
    "solve",
    "solve_grid",
]
