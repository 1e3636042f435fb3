"""Inverse iteration on the pencil ``(Delta1, Delta0)`` and the hybrid II -> RIS driver.

Iterates are ``z_{k+1} = normalize((Delta1 - sigma Delta0)^{-1} Delta0 z_k)``.
Started from a symmetric rank-one vector ``x0 (x) ... (x) x0`` the iterates stay
symmetric, so only symmetric eigenvalues compete for the convergence rate.

For ``m = 1`` the step never forms the ``n^2 x n^2`` matrices.  With the
column-major convention ``z = x1 (x) x2 <=> Z = x2 x1^T`` and
``(M (x) N) vec(Z) = vec(N Z M^T)``, one step is the generalized Sylvester
equation

    (A + g r^T + sigma B) Z C^T - (C - g s^T) Z (A + sigma B)^T
        = (C - g s^T) Z_k B^T - B Z_k C^T,

solved in O(n^3) by :class:`~nepv.sylvester.GeneralizedSylvester`.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from nepv.core import DenominatorNearZero, NepvError, NepvProblem, f_all
from nepv.dense import factor_rank_one, kron_all
from nepv.linearize import MepProblem
from nepv.opdet import (
    DeltaSystem,
    MemoryBudgetExceeded,
    build_deltas,
    column_replaced,
    memory_cap,
    operator_determinant,
)
from nepv.resinv import IterationResult, RiConfig, _residual, lu_checked, ris_solve
from nepv.sylvester import GeneralizedSylvester, SingularSylvesterOperator

log = logging.getLogger(__name__)

PATHS = ("dense", "sylvester", "auto")
AUTO_SYLVESTER_MIN_N = 9
STAGNATION_FACTOR = 0.99


class SingularShiftedPencil(NepvError, np.linalg.LinAlgError):
    pass


@dataclass
class IiConfig:
    """Shift, start and stopping rule for inverse iteration.

    Give either ``x0`` (the start is ``x0 (x) ... (x) x0``) or an explicit
    ``z0`` of length ``n^(m+1)``.  ``path`` is ``"dense"``, ``"sylvester"``
    (``m = 1`` only) or ``"auto"`` (Sylvester when ``m = 1`` and ``n > 8``).
    """

    sigma: complex
    x0: Optional[np.ndarray] = None
    z0: Optional[np.ndarray] = None
    max_iter: int = 50
    tol: float = 1e-10
    path: str = "auto"
    stagnation_window: int = 10
    record_history: bool = True
    record_vectors: bool = False

    def __post_init__(self):
        if self.path not in PATHS:
            raise ValueError(f"path must be one of {PATHS}, got {self.path!r}")
        if self.x0 is None and self.z0 is None:
            raise ValueError("IiConfig needs x0 or z0")


def vec(Z: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return np.asarray(Z).reshape(-1, order="F")


def unvec(z: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(z).reshape((n, n), order="F")


def kron_apply(M: np.ndarray, N: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """``(M (x) N) vec(Z)`` returned as the matrix ``N Z M^T``."""
    return N @ Z @ M.T


def resolve_path(mep: MepProblem, path: str) -> str:
    if path == "auto":
        return "sylvester" if mep.m == 1 and mep.n >= AUTO_SYLVESTER_MIN_N else "dense"
    if path == "sylvester" and mep.m != 1:
        raise ValueError("the Sylvester path needs m = 1")
    return path


class SylvesterStepper:
    """Inverse-iteration step for ``m = 1`` without forming ``Delta0`` or ``Delta1``."""

    def __init__(self, mep: MepProblem, sigma: complex):
        if mep.m != 1:
            raise ValueError("the Sylvester path needs m = 1")
        V = mep.V
        self.n = mep.n
        self.V = V
        M1 = sigma * V[1][1] - V[1][0]
        M2 = V[1][2]
        N1 = V[0][2].T
        N2 = (sigma * V[0][1] - V[0][0]).T
        try:
            self.solver = GeneralizedSylvester(M1, M2, N1, N2)
        except SingularSylvesterOperator as exc:
            raise SingularShiftedPencil(f"Delta1 - sigma Delta0 is singular at sigma = {sigma}") from exc

    def delta0(self, z: np.ndarray) -> np.ndarray:
        V, Z = self.V, unvec(z, self.n)
        return vec(kron_apply(V[0][1], V[1][2], Z) - kron_apply(V[0][2], V[1][1], Z))

    def delta1(self, z: np.ndarray) -> np.ndarray:
        V, Z = self.V, unvec(z, self.n)
        return vec(kron_apply(V[0][0], V[1][2], Z) - kron_apply(V[0][2], V[1][0], Z))

    def step(self, z: np.ndarray) -> np.ndarray:
        return vec(self.solver.solve(unvec(self.delta0(z), self.n)))


class DenseStepper:
    """Inverse-iteration step with one LU of ``Delta1 - sigma Delta0``."""

    def __init__(self, mep: MepProblem, sigma: complex, ds: Optional[DeltaSystem] = None):
        ds = build_deltas(mep) if ds is None else ds
        self.ds = ds
        M = ds.Delta[0] - sigma * ds.Delta0
        lu, piv, rcond = lu_checked(M)
        if rcond < np.finfo(float).eps:
            raise SingularShiftedPencil(f"Delta1 - sigma Delta0 is singular at sigma = {sigma}")
        self.lu = (lu, piv)

    def delta0(self, z):
        return self.ds.Delta0 @ z

    def delta1(self, z):
        return self.ds.Delta[0] @ z

    def step(self, z):
        return sla.lu_solve(self.lu, self.delta0(z), check_finite=False)


def make_stepper(mep: MepProblem, sigma: complex, path: str = "auto", ds: Optional[DeltaSystem] = None):
    if resolve_path(mep, path) == "sylvester":
        return SylvesterStepper(mep, sigma)
    return DenseStepper(mep, sigma, ds)


def sylvester_step(mep: MepProblem, sigma: complex, Zk: np.ndarray) -> np.ndarray:
    """Unnormalized ``Z_{k+1}`` from ``Z_k`` (``m = 1``), by a generalized Sylvester solve."""
    stepper = SylvesterStepper(mep, sigma)
    return stepper.solver.solve(unvec(stepper.delta0(vec(Zk)), mep.n))


def dense_shifted(mep: MepProblem, sigma: complex) -> np.ndarray:
    """``Delta1 - sigma Delta0`` assembled directly.

    By linearity in the first column this is the operator determinant with
    column one replaced by ``V[.][0] - sigma V[.][1]``, so only one
    ``n^l x n^l`` matrix is ever held.
    """
    blocks = column_replaced(mep, 1)
    for r, row in enumerate(mep.V):
        blocks[r][0] = row[0] - sigma * row[1]
    return operator_determinant(blocks)


def dense_step(mep: MepProblem, sigma: complex, Zk: np.ndarray, cap: Optional[int] = None) -> np.ndarray:
    """The same step as :func:`sylvester_step` through the dense ``n^2 x n^2`` solve.

    Kept lean on memory: ``Delta0`` is released before the shifted matrix is
    built, and the LU overwrites it in place.
    """
    N = mep.n ** mep.l
    cap = memory_cap() if cap is None else cap
    if N * N > cap:
        raise MemoryBudgetExceeded(f"dense step needs {N}^2 entries (cap {cap:.3g})")
    Delta0 = operator_determinant(column_replaced(mep, None))
    rhs = Delta0 @ vec(Zk)
    del Delta0
    M = dense_shifted(mep, sigma)
    # M.T is Fortran-ordered, so LAPACK factors it without a copy
    lu = sla.lu_factor(M.T, overwrite_a=True, check_finite=False)
    z = sla.lu_solve(lu, rhs, trans=1, check_finite=False)
    return unvec(z, mep.n)


def _start(mep: MepProblem, cfg: IiConfig) -> np.ndarray:
    if cfg.z0 is not None:
        z = np.asarray(cfg.z0, dtype=complex)
        if z.shape != (mep.n ** mep.l,):
            raise ValueError(f"z0 must have length {mep.n ** mep.l}")
    else:
        x0 = np.asarray(cfg.x0, dtype=complex)
        if x0.shape != (mep.n,):
            raise ValueError(f"x0 must have length {mep.n}")
        z = kron_all([x0] * mep.l)
    nz = np.linalg.norm(z)
    if nz == 0:
        raise ValueError("starting vector is zero")
    return z / nz


def _mu(p: NepvProblem, x) -> list:
    try:
        return [complex(u) for u in f_all(p, x)]
    except DenominatorNearZero:
        return [complex(np.nan)] * p.m


def ii_solve(
    p: NepvProblem,
    mep: MepProblem,
    cfg: IiConfig,
    ds: Optional[DeltaSystem] = None,
) -> IterationResult:
    """Inverse iteration with a fixed shift on ``(Delta1, Delta0)``.

    Each iterate is factored into its best rank-one Kronecker form; the
    first factor ``x`` and the Rayleigh estimate
    ``lam = z^H Delta1 z / z^H Delta0 z`` are scored by the NEPv residual.
    The run stops on ``residual < tol`` (checked from iteration 1), after
    ``max_iter`` steps, or on a plateau: when the best residual of the last
    ``stagnation_window`` iterations is no better than 0.99 times the best
    before them.  A stagnated run reports its best iterate.
    """
    stepper = make_stepper(mep, cfg.sigma, cfg.path, ds)
    z = _start(mep, cfg)
    n, m = mep.n, mep.m
    history, vectors = [], [] if cfg.record_vectors else None
    res_seq = []
    best = None
    converged = stagnated = False
    w = cfg.stagnation_window
    k = 0
    while True:
        x = factor_rank_one(z, n, m).factors[0]
        d0 = np.vdot(z, stepper.delta0(z))
        lam = complex(np.vdot(z, stepper.delta1(z)) / d0) if d0 != 0 else complex(np.nan)
        res = _residual(p, lam, x)
        res_seq.append(res)
        if cfg.record_history:
            history.append((k, res, lam, _mu(p, x)))
        if vectors is not None:
            vectors.append(z.copy())
        if best is None or res < best[0]:
            best = (res, lam, x, k)
        if k >= 1 and res < cfg.tol:
            converged = True
            break
        if w and k >= w and min(res_seq[-w:]) >= STAGNATION_FACTOR * min(res_seq[:-w]):
            stagnated = True
            log.info("II stagnated at iteration %d, best residual %.3e", k, best[0])
            break
        if k >= cfg.max_iter:
            break
        z = stepper.step(z)
        nz = np.linalg.norm(z)
        if not np.isfinite(nz) or nz == 0:
            raise SingularShiftedPencil("inverse iteration produced a non-finite iterate")
        z = z / nz
        k += 1
    if stagnated:
        res, lam, x, _ = best
    return IterationResult(
        lam=lam,
        mu=_mu(p, x),
        x=x,
        converged=converged,
        iterations=k,
        history=history,
        method="ii",
        stagnated=stagnated,
        vectors=vectors,
        final_residual=res,
    )


def hybrid_solve(
    p: NepvProblem,
    mep: MepProblem,
    cfg_ii: IiConfig,
    k_switch: int,
    cfg_ris: Optional[RiConfig] = None,
    ds: Optional[DeltaSystem] = None,
) -> IterationResult:
    """``k_switch`` inverse-iteration steps, then symmetric residual inverse iteration.

    The II iterate is factored to ``x``; RIS starts from ``x`` with
    ``sigma`` the Rayleigh estimate and ``tau_i = f_i(x)``.  The returned
    history is the II history followed by the RIS steps, numbered
    consecutively, and ``switch_iteration`` marks the last II iteration.
    ``cfg_ris`` supplies ``max_iter``, ``tol`` and ``v``; its shifts and
    start are overwritten.  ``k_switch >= cfg_ii.max_iter`` returns the II run.
    """
    if k_switch < 0:
        raise ValueError("k_switch must be non-negative")
    if k_switch >= cfg_ii.max_iter:
        return ii_solve(p, mep, cfg_ii, ds)
    ii = ii_solve(p, mep, dataclasses.replace(cfg_ii, max_iter=k_switch, stagnation_window=0), ds)
    if ii.converged:
        ii.method = "hybrid"
        return ii
    base = RiConfig(sigma=0.0, x0=ii.x, tol=cfg_ii.tol) if cfg_ris is None else cfg_ris
    cfg = dataclasses.replace(base, sigma=ii.lam, x0=ii.x, tau=None)
    ris = ris_solve(mep, cfg)
    shift = ii.iterations
    history = list(ii.history) + [(k + shift, r, lam, mu) for k, r, lam, mu in ris.history[1:]]
    vectors = None
    if ii.vectors is not None and ris.vectors is not None:
        vectors = list(ii.vectors) + list(ris.vectors[1:])
    return IterationResult(
        lam=ris.lam,
        mu=ris.mu,
        x=ris.x,
        converged=ris.converged,
        iterations=shift + ris.iterations,
        history=history,
        method="hybrid",
        stagnated=ris.stagnated,
        vectors=vectors,
        switch_iteration=shift,
        final_residual=ris.residual,
    )
