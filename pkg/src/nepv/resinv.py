"""Residual inverse iteration on the linearized MEP.

Row ``i`` of the MEP is written as ``T_i(lam, mu) x_i = 0`` with

    T_i(lam, mu) = -V[i][0] + lam V[i][1] + sum_j mu_j V[i][1 + j],

so ``T_1 = A + lam B + sum mu_j C_j`` and ``T_{i+1}`` adds
``g_i r_i^T - mu_i g_i s_i^T``.  The shifted matrices ``T_i(sigma, tau)`` are
factored once; each step solves a small ``(m+1) x (m+1)`` system for the
parameter update and applies one frozen-factorization correction to the
eigenvector.

:func:`ris_solve` keeps a single vector (all MEP components equal), which
is exact when every row uses the same normalization vector and start.
:func:`ri_solve` is the unstructured method with one vector per row.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from nepv.core import DenominatorNearZero, NepvError, f_all, nepv_residual
from nepv.linearize import MepProblem

log = logging.getLogger(__name__)

UPDATE_COND_LIMIT = 1e12


class SingularShiftedMatrix(NepvError, np.linalg.LinAlgError):
    pass


class SingularUpdateSystem(NepvError, np.linalg.LinAlgError):
    pass


@dataclass
class RiConfig:
    """Fixed shifts and start for residual inverse iteration.

    ``tau`` defaults to ``f_i(x0)``; ``v`` defaults to ``conj(x0) / (x0^H x0)``.
    For :func:`ri_solve`, ``x0`` and ``v`` may also be sequences of m+1 vectors.
    """

    sigma: complex
    x0: np.ndarray
    tau: Optional[Sequence[complex]] = None
    v: Optional[np.ndarray] = None
    max_iter: int = 100
    tol: float = 1e-12
    record_history: bool = True
    record_vectors: bool = False


@dataclass
class IterationResult:
    lam: complex
    mu: list
    x: np.ndarray
    converged: bool
    iterations: int
    history: list = field(default_factory=list)
    method: str = ""
    stagnated: bool = False
    xs: Optional[list] = None
    vectors: Optional[list] = None
    switch_iteration: Optional[int] = None
    final_residual: Optional[float] = None

    @property
    def residual(self) -> float:
        """NEPv residual of the reported ``(lam, x)``."""
        if self.final_residual is not None:
            return self.final_residual
        return self.history[-1][1] if self.history else float("nan")

    @property
    def residuals(self) -> np.ndarray:
        return np.array([h[1] for h in self.history])


def make_T(mep: MepProblem, i: int, lam: complex, mu) -> np.ndarray:
    """``T_i(lam, mu)`` for MEP row ``i`` (0-based)."""
    row = mep.V[i]
    T = -row[0] + lam * row[1]
    for j, mj in enumerate(mu):
        T = T + mj * row[2 + j]
    return T


def _apply_T(mep: MepProblem, i: int, lam, mu, x) -> np.ndarray:
    row = mep.V[i]
    y = lam * (row[1] @ x) - row[0] @ x
    for j, mj in enumerate(mu):
        y = y + mj * (row[2 + j] @ x)
    return y


def lu_checked(M: np.ndarray):
    """LU factors and the LAPACK reciprocal 1-norm condition estimate."""
    # singularity is judged from rcond below, so LAPACK's warning is redundant
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    gecon = lapack.get_lapack_funcs("gecon", (lu,))
    rcond, _ = gecon(lu, np.linalg.norm(M, 1), norm="1")
    return lu, piv, float(rcond) if np.all(np.diag(lu)) else 0.0


def _factor(M: np.ndarray, what: str):
    lu, piv, rcond = lu_checked(M)
    if rcond < np.finfo(float).eps:
        raise SingularShiftedMatrix(f"{what} is numerically singular (rcond {rcond:.2e})")
    return lu, piv


def _default_v(x0: np.ndarray) -> np.ndarray:
    return np.conj(x0) / np.vdot(x0, x0).real


@dataclass
class RisSetup:
    """Factorizations of ``T_i(sigma, tau)`` and the precomputed row functionals."""

    mep: MepProblem
    sigma: complex
    tau: np.ndarray
    v: list
    lus: list
    u: list
    psi: list

    def update_matrix(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        l = self.mep.l
        return np.array([[self.psi[i][phi] @ xs[i] for phi in range(l)] for i in range(l)])

    def gammas(self, lam, mu, xs) -> np.ndarray:
        return np.array([self.u[i] @ _apply_T(self.mep, i, lam, mu, xs[i]) for i in range(self.mep.l)])

    def correct(self, i: int, lam, mu, x) -> np.ndarray:
        """``x - T_i(sigma, tau)^{-1} T_i(lam, mu) x``, normalized by ``v_i``."""
        z = x - sla.lu_solve(self.lus[i], _apply_T(self.mep, i, lam, mu, x), check_finite=False)
        return z / (self.v[i] @ z)


def prepare(mep: MepProblem, sigma: complex, tau, v, rows: Optional[Sequence[int]] = None) -> RisSetup:
    """Factor every ``T_i(sigma, tau)`` and precompute ``psi_{phi,i} = (dT_i/dphi)^T T_i^{-T} v_i``."""
    l = mep.l
    tau = np.asarray(tau)
    vs = list(v) if isinstance(v, (list, tuple)) else [v] * l
    lus, us, psi = [], [], []
    for i in range(l):
        lu = _factor(make_T(mep, i, sigma, tau), f"T_{i + 1}(sigma, tau)")
        # u_i^T = v_i^T T_i^{-1}  <=>  T_i^T u_i = v_i
        u = sla.lu_solve(lu, vs[i], trans=1, check_finite=False)
        lus.append(lu)
        us.append(u)
        psi.append([mep.V[i][1 + phi].T @ u for phi in range(l)])
    return RisSetup(mep=mep, sigma=sigma, tau=tau, v=vs, lus=lus, u=us, psi=psi)


def _solve_update(M: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > UPDATE_COND_LIMIT:
        raise SingularUpdateSystem(f"parameter update system is singular (cond {cond:.2e})")
    return np.linalg.solve(M, -gamma)


def ris_step(setup: RisSetup, lam, mu, x):
    """One symmetric step; returns ``(dlam, dmu, x_next)``."""
    l = setup.mep.l
    xs = [x] * l
    d = _solve_update(setup.update_matrix(xs), setup.gammas(lam, mu, xs))
    lam_next = lam + d[0]
    mu_next = np.asarray(mu) + d[1:]
    return d[0], d[1:], setup.correct(0, lam_next, mu_next, x)


def ri_step(setup: RisSetup, lam, mu, xs):
    """One unstructured step on all m+1 vectors; returns ``(dlam, dmu, xs_next)``."""
    d = _solve_update(setup.update_matrix(xs), setup.gammas(lam, mu, xs))
    lam_next = lam + d[0]
    mu_next = np.asarray(mu) + d[1:]
    xs_next = [setup.correct(i, lam_next, mu_next, xs[i]) for i in range(setup.mep.l)]
    return d[0], d[1:], xs_next


def _residual(p, lam, x) -> float:
    try:
        return nepv_residual(p, lam, x)
    except DenominatorNearZero:
        return float("inf")


def _initial(mep: MepProblem, cfg: RiConfig, x0: np.ndarray):
    p = mep.problem
    if p is None:
        raise ValueError("the MEP must carry its NEPv problem (use build_mep)")
    v = _default_v(x0) if cfg.v is None else cfg.v
    tau = f_all(p, x0) if cfg.tau is None else np.asarray(cfg.tau, dtype=complex)
    return p, v, tau


def ris_solve(mep: MepProblem, cfg: RiConfig) -> IterationResult:
    """Symmetric residual inverse iteration (one eigenvector for all MEP rows)."""
    x = np.asarray(cfg.x0, dtype=complex)
    p, v, tau = _initial(mep, cfg, x)
    v = np.asarray(v)
    setup = prepare(mep, cfg.sigma, tau, v)
    x = x / (v @ x)
    lam, mu = complex(cfg.sigma), np.array(tau, dtype=complex)
    history, vectors = [], [] if cfg.record_vectors else None
    converged = False
    k = 0
    while True:
        res = _residual(p, lam, x)
        if cfg.record_history:
            history.append((k, res, lam, list(mu)))
        if vectors is not None:
            vectors.append(x.copy())
        if res < cfg.tol:
            converged = True
            break
        if k >= cfg.max_iter:
            break
        dlam, dmu, x = ris_step(setup, lam, mu, x)
        lam, mu = lam + dlam, mu + dmu
        k += 1
    if not converged:
        log.info("RIS stopped after %d iterations with residual %.3e", k, res)
    return IterationResult(
        lam=lam,
        mu=list(mu),
        x=x / np.linalg.norm(x),
        converged=converged,
        iterations=k,
        history=history,
        method="ris",
        vectors=vectors,
        final_residual=res,
    )


def ri_solve(mep: MepProblem, cfg: RiConfig) -> IterationResult:
    """Residual inverse iteration with an independent vector per MEP row."""
    l = mep.l
    x0 = cfg.x0
    if isinstance(x0, (list, tuple)):
        xs = [np.asarray(x, dtype=complex) for x in x0]
    else:
        xs = [np.asarray(x0, dtype=complex)] * l
    p, v, tau = _initial(mep, cfg, xs[0])
    vs = list(v) if isinstance(v, (list, tuple)) else [np.asarray(v)] * l
    setup = prepare(mep, cfg.sigma, tau, vs)
    xs = [x / (vi @ x) for x, vi in zip(xs, vs)]
    lam, mu = complex(cfg.sigma), np.array(tau, dtype=complex)
    history, vectors = [], [] if cfg.record_vectors else None
    converged = False
    k = 0
    while True:
        res = _residual(p, lam, xs[0])
        if cfg.record_history:
            history.append((k, res, lam, list(mu)))
        if vectors is not None:
            vectors.append([x.copy() for x in xs])
        if res < cfg.tol:
            converged = True
            break
        if k >= cfg.max_iter:
            break
        dlam, dmu, xs = ri_step(setup, lam, mu, xs)
        lam, mu = lam + dlam, mu + dmu
        k += 1
    return IterationResult(
        lam=lam,
        mu=list(mu),
        x=xs[0] / np.linalg.norm(xs[0]),
        converged=converged,
        iterations=k,
        history=history,
        method="ri",
        xs=xs,
        vectors=vectors,
        final_residual=res,
    )
