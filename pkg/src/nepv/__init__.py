"""Solvers for eigenvector-nonlinear eigenproblems with rational-linear terms.

The problem ``(A + lam B + sum_i f_i(x) C_i) x = 0`` with
``f_i(x) = r_i^T x / s_i^T x`` is linearized exactly into a multiparameter
eigenvalue problem.  All solutions follow from one dense generalized
eigenproblem on operator determinants (:func:`solve_all`); single solutions
come from residual inverse iteration (:func:`ris_solve`, :func:`ri_solve`),
inverse iteration (:func:`ii_solve`) or their hybrid (:func:`hybrid_solve`).
"""
from nepv.core import (
    Classification,
    DenominatorNearZero,
    DimensionMismatch,
    NepvError,
    NepvProblem,
    SolutionRecord,
    count_solutions,
    f_all,
    f_eval,
    nepv_residual,
)
from nepv.dense import DenseSolution, factor_rank_one, solve_all, solve_gep
from nepv.invit import IiConfig, hybrid_solve, ii_solve, sylvester_step
from nepv.linearize import MepProblem, build_mep, random_g, validate_g
from nepv.opdet import MemoryBudgetExceeded, build_deltas, operator_determinant
from nepv.problems import PdeSpec, brute_force_solve, example_2x2, gen_pde, gen_random
from nepv.resinv import IterationResult, RiConfig, ri_solve, ris_solve

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "DenominatorNearZero",
    "DenseSolution",
    "DimensionMismatch",
    "IiConfig",
    "IterationResult",
    "MemoryBudgetExceeded",
    "MepProblem",
    "NepvError",
    "NepvProblem",
    "PdeSpec",
    "RiConfig",
    "SolutionRecord",
    "brute_force_solve",
    "build_deltas",
    "build_mep",
    "count_solutions",
    "example_2x2",
    "f_all",
    "f_eval",
    "factor_rank_one",
    "gen_pde",
    "gen_random",
    "hybrid_solve",
    "ii_solve",
    "nepv_residual",
    "operator_determinant",
    "random_g",
    "ri_solve",
    "ris_solve",
    "solve_all",
    "solve_gep",
    "sylvester_step",
    "validate_g",
]
