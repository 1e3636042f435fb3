"""Operator determinants of block arrays (Kronecker cofactor expansion)."""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from nepv.core import DimensionMismatch, NepvError
from nepv.linearize import MepProblem

DEFAULT_MEMORY_CAP = 2 * 10**8
SINGULAR_COND = 1e-3 / np.finfo(float).eps


class MemoryBudgetExceeded(NepvError, MemoryError):
    pass


class SingularDelta0(NepvError, np.linalg.LinAlgError):
    pass


class Nonsingular(str, Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


def memory_cap() -> int:
    """Maximum number of entries in one dense operator determinant."""
    env = os.environ.get("NEPV_MEMORY_CAP")
    return int(float(env)) if env else DEFAULT_MEMORY_CAP


def _check_blocks(blocks) -> int:
    k = len(blocks)
    if k == 0 or any(len(row) != k for row in blocks):
        raise DimensionMismatch("block array must be k x k")
    n = np.asarray(blocks[0][0]).shape[0]
    for row in blocks:
        for M in row:
            if np.shape(M) != (n, n):
                raise DimensionMismatch(f"all blocks must be {n} x {n}")
    return n


def _expand(blocks) -> np.ndarray:
    k = len(blocks)
    if k == 1:
        return np.asarray(blocks[0][0])
    out = None
    for j in range(k):
        minor = [row[:j] + row[j + 1:] for row in blocks[1:]]
        term = np.kron(blocks[0][j], _expand(minor))
        if out is None:
            out = term
        elif j % 2:
            out -= term
        else:
            out += term
        del term
    return out


def operator_determinant(blocks: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    """Operator determinant of a k x k array of n x n blocks.

    Expanded along the first block row with alternating signs, each product
    written as ``first-row block (x) minor``.  The result is ``n^k x n^k``.
    """
    blocks = [list(row) for row in blocks]
    _check_blocks(blocks)
    dtype = np.result_type(*[M for row in blocks for M in row])
    blocks = [[np.asarray(M, dtype=dtype) for M in row] for row in blocks]
    return np.array(_expand(blocks), copy=len(blocks) == 1)


@dataclass
class DeltaSystem:
    """``Delta0`` and ``Delta[0..m]`` (``Delta[0]`` pairs with lam, ``Delta[i]`` with mu_i)."""

    Delta0: np.ndarray
    Delta: list
    nonsingular: Nonsingular
    cond_estimate: Optional[float]

    @property
    def N(self) -> int:
        return self.Delta0.shape[0]


def _estimate_cond(M: np.ndarray) -> Optional[float]:
    """1-norm condition estimate via LU and LAPACK ``gecon``."""
    try:
        with warnings.catch_warnings():
            # exact singularity is reported through the flag, not a warning
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(M, check_finite=False)
    except (ValueError, np.linalg.LinAlgError):
        return None
    if np.any(np.diag(lu) == 0):
        return np.inf
    anorm = np.linalg.norm(M, 1)
    gecon = lapack.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        return None
    return np.inf if rcond == 0 else 1.0 / rcond


def column_replaced(mep: MepProblem, i: Optional[int]) -> list:
    """Block array of ``Delta0`` (``i is None``) or of ``Delta_i`` (1-based column ``i``)."""
    blocks = [list(row[1:]) for row in mep.V]
    if i is not None:
        for r, row in enumerate(mep.V):
            blocks[r][i - 1] = row[0]
    return blocks


def build_deltas(mep: MepProblem, cap: Optional[int] = None) -> DeltaSystem:
    N = mep.n ** mep.l
    cap = memory_cap() if cap is None else cap
    if N * N > cap:
        raise MemoryBudgetExceeded(
            f"operator determinants would have {N}^2 = {N * N:.3g} entries (cap {cap:.3g}); "
            "use an iterative solver"
        )
    Delta0 = operator_determinant(column_replaced(mep, None))
    Delta = [operator_determinant(column_replaced(mep, i)) for i in range(1, mep.l + 1)]
    cond = _estimate_cond(Delta0)
    if cond is None:
        flag = Nonsingular.UNKNOWN
    else:
        flag = Nonsingular.YES if cond < SINGULAR_COND else Nonsingular.NO
    return DeltaSystem(Delta0=Delta0, Delta=Delta, nonsingular=flag, cond_estimate=cond)


def commute_check(ds: DeltaSystem) -> float:
    """Largest normalized commutator of the matrices ``Delta0^{-1} Delta_i``."""
    if ds.nonsingular is Nonsingular.NO:
        raise SingularDelta0(f"Delta0 is numerically singular (cond ~ {ds.cond_estimate:.2e})")
    if len(ds.Delta) < 2:
        return 0.0
    lu = sla.lu_factor(ds.Delta0)
    Gammas = [sla.lu_solve(lu, D) for D in ds.Delta]
    worst = 0.0
    for i in range(len(Gammas)):
        for j in range(i + 1, len(Gammas)):
            Gi, Gj = Gammas[i], Gammas[j]
            c = np.linalg.norm(Gi @ Gj - Gj @ Gi) / (np.linalg.norm(Gi) * np.linalg.norm(Gj))
            worst = max(worst, float(c))
    return worst


@dataclass(frozen=True)
class ColumnPropertyReport:
    swap_deviation: float
    duplicate_deviation: float
    add_multiple_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.swap_deviation, self.duplicate_deviation, self.add_multiple_deviation)


def column_property_check(blocks, i: int, j: int, alpha: complex = 2.0) -> ColumnPropertyReport:
    """Check the three column rules of operator determinants on ``blocks``.

    Columns ``i`` and ``j`` are 0-based.  Deviations are Frobenius norms of
    (swapped + original), (duplicated column result), and
    (column ``i`` += ``alpha`` * column ``j``) - original.
    """
    blocks = [list(row) for row in blocks]
    k = len(blocks)
    _check_blocks(blocks)
    if not (0 <= i < k and 0 <= j < k) or i == j:
        raise DimensionMismatch(f"need distinct column indices in [0, {k})")
    base = operator_determinant(blocks)

    swapped = [row.copy() for row in blocks]
    for row in swapped:
        row[i], row[j] = row[j], row[i]
    d_swap = np.linalg.norm(operator_determinant(swapped) + base)

    dup = [row.copy() for row in blocks]
    for row in dup:
        row[i] = row[j]
    d_dup = np.linalg.norm(operator_determinant(dup))

    added = [row.copy() for row in blocks]
    for row in added:
        row[i] = row[i] + alpha * row[j]
    d_add = np.linalg.norm(operator_determinant(added) - base)
    return ColumnPropertyReport(float(d_swap), float(d_dup), float(d_add))
