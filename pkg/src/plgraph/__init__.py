"""Discrete potential theory on infinite weighted graphs.

Finite ball truncations of spherically symmetric trees and integer lattices,
the weighted Laplacian and Schrödinger operator ``Delta - V``, explicit barrier
functions with pointwise verification, Dirichlet solvers, and exhaustion
experiments contrasting uniqueness and nonuniqueness of bounded solutions.
"""

from .barriers import BarrierSpec, TreeRadial, search_parameter, shift, verify, verify_field
from .dirichlet import DirichletProblem, assemble, comparison_check, pl_certificate, solve, solve_problem
from .experiments import ExhaustionRun, exhaustion_run, growth_ratio_profile, tree_phase_sweep
from .graph_core import (
    Branching,
    GraphBall,
    LatticeSpec,
    TreeSpec,
    build_ball,
    build_lattice_ball,
    build_tree_ball,
    outer_inner_degree,
    validate,
)
from .operators import Potential, classify, laplacian, laplacian_apply, schrodinger_residual
from .radial import RadialProfile, lift_and_check, radial_dirichlet_solve, radial_laplacian, tree_profile

__version__ = "0.1.0"

__all__ = [
    "assemble",
    "BarrierSpec",
    "Branching",
    "build_ball",
    "build_lattice_ball",
    "build_tree_ball",
    "classify",
    "comparison_check",
    "DirichletProblem",
    "exhaustion_run",
    "ExhaustionRun",
    "GraphBall",
    "growth_ratio_profile",
    "laplacian",
    "laplacian_apply",
    "LatticeSpec",
    "lift_and_check",
    "outer_inner_degree",
    "pl_certificate",
    "Potential",
    "radial_dirichlet_solve",
    "radial_laplacian",
    "RadialProfile",
    "schrodinger_residual",
    "search_parameter",
    "shift",
    "solve",
    "solve_problem",
    "tree_phase_sweep",
    "tree_profile",
    "TreeRadial",
    "TreeSpec",
    "validate",
    "verify",
    "verify_field",
]
