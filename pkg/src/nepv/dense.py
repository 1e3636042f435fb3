"""Dense path: all solutions from the pencil ``(Delta1, Delta0)``.

Every eigenvector ``z`` of ``Delta1 z = lam Delta0 z`` is factored as a
Kronecker product ``x_1 (x) ... (x) x_{m+1}``.  Eigenvectors with collinear
factors and an admissible first factor give NEPv solutions; the others are
reported together with a left-eigenvector diagnosis of why they fail.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from nepv.core import (
    TOL_ACCEPT,
    TOL_S,
    Classification,
    DenominatorNearZero,
    NepvError,
    NepvProblem,
    SolutionRecord,
    f_all,
    nepv_residual,
    sin_angle,
)
from nepv.linearize import MepProblem, build_mep, random_g
from nepv.opdet import DeltaSystem, build_deltas

TOL_SYM = 1e-6
TOL_FIT = 1e-6
TOL_DEDUP = 1e-8
TOL_G_ORTH = 1e-6


class SingularPencil(NepvError, np.linalg.LinAlgError):
    pass


class ConvergenceFailure(NepvError, np.linalg.LinAlgError):
    pass


class DegenerateRayleigh(NepvError, ZeroDivisionError):
    pass


@dataclass
class GepEigenpair:
    """Eigenvalue with unit right eigenvector ``z`` and optional left vector.

    ``left_w`` is in transposed form: ``w^T Delta1 = lam w^T Delta0``.
    """

    lam: complex
    z: np.ndarray
    left_w: Optional[np.ndarray] = None
    backward_error: float = 0.0


def fix_phase(x: np.ndarray) -> np.ndarray:
    """Scale ``x`` to unit norm with its largest entry real and positive."""
    x = np.asarray(x, dtype=complex)
    k = int(np.argmax(np.abs(x)))
    x = x * (abs(x[k]) / x[k])
    x = x / np.linalg.norm(x)
    x[k] = x[k].real
    if np.all(x.imag == 0):
        return x.real.copy()
    return x


def solve_gep(Delta1: np.ndarray, Delta0: np.ndarray, left: bool = False) -> list:
    """All eigenpairs of the pencil by QZ (LAPACK ``ggev``)."""
    try:
        res = sla.eig(Delta1, Delta0, left=left, right=True, homogeneous_eigvals=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if left:
        (alpha, beta), vl, vr = res
    else:
        (alpha, beta), vr = res
        vl = None
    n1 = np.linalg.norm(Delta1)
    n0 = np.linalg.norm(Delta0)
    if np.any(np.abs(beta) <= Delta0.shape[0] * np.finfo(float).eps * n0):
        raise SingularPencil("pencil has infinite or indeterminate eigenvalues; Delta0 is singular")
    lams = alpha / beta
    Z = vr / np.linalg.norm(vr, axis=0)
    R = _matmul(Delta1, Z) - _matmul(Delta0, Z) * lams
    berr = np.linalg.norm(R, axis=0) / (n1 + np.abs(lams) * n0)
    pairs = []
    for k, lam in enumerate(lams):
        w = None
        if vl is not None:
            w = np.conj(vl[:, k])
            w = w / np.linalg.norm(w)
        pairs.append(GepEigenpair(lam=complex(lam), z=Z[:, k], left_w=w, backward_error=float(berr[k])))
    return pairs


def _matmul(M: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """``M @ Z`` for real ``M`` and complex ``Z`` without a complex copy of ``M``."""
    if np.isrealobj(M) and np.iscomplexobj(Z):
        # strided .real/.imag views fall off the BLAS path
        return M @ np.ascontiguousarray(Z.real) + 1j * (M @ np.ascontiguousarray(Z.imag))
    return M @ Z


def rayleigh_all(Z: np.ndarray, Deltas: list, Delta0: np.ndarray) -> np.ndarray:
    """Rayleigh quotients ``z^H Delta_i z / z^H Delta0 z`` for every column; shape (len(Deltas), K)."""
    den = np.sum(np.conj(Z) * _matmul(Delta0, Z), axis=0)
    bad = np.abs(den) <= 1e-12 * np.linalg.norm(Delta0) * np.sum(np.abs(Z) ** 2, axis=0)
    out = np.array([np.sum(np.conj(Z) * _matmul(D, Z), axis=0) for D in Deltas]) / np.where(bad, 1, den)
    out[:, bad] = np.nan
    return out


def mu_from_rayleigh(z: np.ndarray, Delta_i: np.ndarray, Delta0: np.ndarray) -> complex:
    """``z^H Delta_i z / z^H Delta0 z``."""
    den = np.vdot(z, Delta0 @ z)
    if abs(den) <= 1e-12 * np.linalg.norm(Delta0) * np.vdot(z, z).real:
        raise DegenerateRayleigh("z^H Delta0 z is numerically zero")
    return complex(np.vdot(z, Delta_i @ z) / den)


@dataclass
class RankOneFactorization:
    factors: list
    fit: float
    alpha: complex
    symmetry_defect: float
    decomposable: bool
    symmetric: bool


def kron_all(factors) -> np.ndarray:
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def _mode_vector(T: np.ndarray, factors: list, k: int) -> np.ndarray:
    """Contract ``T`` with ``conj(factors[j])`` on every mode except ``k``."""
    out = T
    # contract from the last mode down so axis numbers stay valid
    for j in reversed(range(len(factors))):
        if j != k:
            out = np.tensordot(out, np.conj(factors[j]), axes=([j], [0]))
    return out


def factor_rank_one(
    z: np.ndarray,
    n: int,
    m: int,
    tol_sym: float = TOL_SYM,
    tol_fit: float = TOL_FIT,
    sweeps: int = 5,
) -> RankOneFactorization:
    """Best rank-one Kronecker factorization ``z ~ alpha x_1 (x) ... (x) x_{m+1}``.

    Factors are peeled one mode at a time from the dominant singular pair of
    the ``n x n^(...)`` unfolding, then polished by a few alternating
    (higher-order power) sweeps when there are three or more modes.
    """
    z = np.asarray(z, dtype=complex)
    l = m + 1
    if z.shape != (n**l,):
        raise ValueError(f"z must have length {n}^{l}")
    znorm = np.linalg.norm(z)
    factors = []
    rest = z
    for _ in range(l - 1):
        M = rest.reshape(n, -1)
        U, S, Vh = np.linalg.svd(M, full_matrices=False)
        factors.append(U[:, 0])
        rest = S[0] * Vh[0]
    factors.append(rest / np.linalg.norm(rest))
    if l > 2 and sweeps:
        T = z.reshape((n,) * l)
        for _ in range(sweeps):
            for k in range(l):
                v = _mode_vector(T, factors, k)
                factors[k] = v / np.linalg.norm(v)
    factors = [fix_phase(f) for f in factors]
    kz = kron_all(factors)
    alpha = np.vdot(kz, z)
    fit = float(np.linalg.norm(z - alpha * kz) / znorm)
    defect = max((sin_angle(f, factors[0]) for f in factors[1:]), default=0.0)
    decomposable = fit < tol_fit
    return RankOneFactorization(
        factors=factors,
        fit=fit,
        alpha=complex(alpha),
        symmetry_defect=defect,
        decomposable=decomposable,
        symmetric=decomposable and defect < tol_sym,
    )


def diagnose_spurious(
    mep: MepProblem,
    pair: GepEigenpair,
    x1: Optional[np.ndarray] = None,
    tol_s: float = TOL_S,
    tol_g: float = TOL_G_ORTH,
) -> dict:
    """Evaluate the two back-mapping hypotheses for a rejected eigenpair.

    Reports normalized ``|g_j^T y_{j+1}|`` from the factored left eigenvector
    and ``|s_j^T x_1|``; ``failed`` lists every hypothesis that does not hold.
    """
    if pair.left_w is None:
        raise ValueError("diagnosis needs the left eigenvector")
    p = mep.problem
    n, m = mep.n, mep.m
    yf = factor_rank_one(pair.left_w, n, m)
    if x1 is None:
        x1 = factor_rank_one(pair.z, n, m).factors[0]
    g_dot_y = []
    failed = []
    for j in range(m):
        y = yf.factors[j + 1]
        val = abs(mep.g[j] @ y) / (np.linalg.norm(mep.g[j]) * np.linalg.norm(y))
        g_dot_y.append(float(val))
        if val < tol_g:
            failed.append(f"g_{j + 1}^T y_{j + 2} = 0")
    s_dot_x = []
    if p is not None:
        for j in range(m):
            val = abs(p.s[j] @ x1) / (np.linalg.norm(p.s[j]) * np.linalg.norm(x1))
            s_dot_x.append(float(val))
            if val <= tol_s:
                failed.append(f"s_{j + 1}^T x_1 = 0")
    return {
        "lambda": [pair.lam.real, pair.lam.imag],
        "left_factors": [[[complex(v).real, complex(v).imag] for v in y] for y in yf.factors],
        "left_fit": yf.fit,
        "g_dot_y": g_dot_y,
        "s_dot_x": s_dot_x,
        "failed": failed,
    }


def _s_filter(p: NepvProblem, x: np.ndarray, tol_s: float) -> bool:
    nx = np.linalg.norm(x)
    return all(abs(si @ x) > tol_s * np.linalg.norm(si) * nx for si in p.s)


def _clustered(lams: np.ndarray, k: int, tol: float) -> bool:
    d = np.abs(lams - lams[k])
    d[k] = np.inf
    return bool(np.any(d <= tol * (1 + abs(lams[k]))))


def extract_nepv_solutions(
    p: NepvProblem,
    mep: MepProblem,
    ds: DeltaSystem,
    pairs: Optional[list] = None,
    tol_accept: float = TOL_ACCEPT,
    tol_s: float = TOL_S,
    tol_sym: float = TOL_SYM,
    diagnose: bool = True,
) -> list:
    """Classify every eigenpair of ``(Delta1, Delta0)`` as True / Spurious / NonSymmetric."""
    if pairs is None:
        pairs = solve_gep(ds.Delta[0], ds.Delta0, left=diagnose)
    lams = np.array([pr.lam for pr in pairs])
    records = []
    facs = [factor_rank_one(pair.z, p.n, p.m, tol_sym=tol_sym) for pair in pairs]
    rejected = [k for k, fac in enumerate(facs) if not fac.symmetric]
    mu_rq = {}
    if rejected:
        Zr = np.stack([pairs[k].z for k in rejected], axis=1)
        rq = rayleigh_all(Zr, ds.Delta[1:], ds.Delta0)
        mu_rq = {k: list(rq[:, c]) for c, k in enumerate(rejected)}
    for k, pair in enumerate(pairs):
        fac = facs[k]
        x = fac.factors[0]
        cls = None
        if fac.symmetric and _s_filter(p, x, tol_s):
            res = nepv_residual(p, pair.lam, x, tol_s)
            if res < tol_accept:
                cls = Classification.TRUE
                mu = list(f_all(p, x, tol_s))
        if cls is None:
            if fac.symmetric:
                cls = Classification.SPURIOUS
            elif _clustered(lams, k, TOL_DEDUP):
                cls = Classification.UNKNOWN
            else:
                cls = Classification.NON_SYMMETRIC
            try:
                res = nepv_residual(p, pair.lam, x, tol_s)
            except DenominatorNearZero:
                res = float("inf")
            if k in mu_rq:
                mu = mu_rq[k]
            else:
                mu = list(rayleigh_all(pair.z[:, None], ds.Delta[1:], ds.Delta0)[:, 0])
        diag = None
        if cls is not Classification.TRUE and diagnose and pair.left_w is not None:
            diag = diagnose_spurious(mep, pair, x1=x, tol_s=tol_s)
        records.append(
            SolutionRecord(
                lam=pair.lam,
                mu=[complex(u) for u in mu],
                x=x,
                classification=cls,
                residual=float(res),
                diagnostics=diag,
                fit=fac.fit,
                symmetry_defect=fac.symmetry_defect,
            )
        )
    return _deduplicate(records)


def _deduplicate(records: list) -> list:
    kept = []
    for rec in records:
        dup = any(
            other.classification is rec.classification
            and abs(other.lam - rec.lam) <= TOL_DEDUP * (1 + abs(rec.lam))
            and sin_angle(other.x, rec.x) <= TOL_DEDUP
            for other in kept
        )
        if not dup:
            kept.append(rec)
    return kept


@dataclass
class DenseSolution:
    mep: MepProblem
    deltas: DeltaSystem
    pairs: list
    records: list

    def by_class(self, cls: Classification) -> list:
        return [r for r in self.records if r.classification is cls]

    @property
    def true_records(self) -> list:
        return self.by_class(Classification.TRUE)


def solve_all(
    p: NepvProblem,
    g=None,
    g_seed: int = 0,
    diagnose: bool = True,
    tol_accept: float = TOL_ACCEPT,
    tol_s: float = TOL_S,
    cap: Optional[int] = None,
) -> DenseSolution:
    """Linearize, build the operator determinants and classify every eigenpair."""
    if g is None:
        g = random_g(p.n, p.m, g_seed)
    mep = build_mep(p, g)
    ds = build_deltas(mep, cap=cap)
    pairs = solve_gep(ds.Delta[0], ds.Delta0, left=diagnose)
    records = extract_nepv_solutions(
        p, mep, ds, pairs=pairs, tol_accept=tol_accept, tol_s=tol_s, diagnose=diagnose
    )
    return DenseSolution(mep=mep, deltas=ds, pairs=pairs, records=records)
