"""Exact linearization of a rational-linear NEPv to an (m+1)-parameter MEP.

Row 1 of the MEP is the NEPv with each ``f_i(x)`` replaced by a free
parameter ``mu_i``; row ``i+1`` adds ``g_i (r_i - mu_i s_i)^T`` to it.  For a
common vector ``x`` the row difference is ``g_i (r_i^T x - mu_i s_i^T x)``,
which vanishes exactly when ``mu_i = f_i(x)``.

Sign convention for every row ``i``::

    V[i][0] x = (lam V[i][1] + mu_1 V[i][2] + ... + mu_m V[i][m+1]) x
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from nepv.core import NepvError, NepvProblem, DimensionMismatch, sin_angle
from nepv.rng import named_rng

MIN_PAIRWISE_SIN = 1e-8


class InvalidG(NepvError, ValueError):
    def __init__(self, report: "GValidation"):
        self.report = report
        super().__init__(f"invalid g vectors: {report.reason.value} (indices {report.indices})")


class GFailure(str, Enum):
    NONE = "None"
    WRONG_SHAPE = "WrongShape"
    ZERO_VECTOR = "ZeroVector"
    PAIRWISE_DEPENDENT = "PairwiseDependent"


@dataclass(frozen=True)
class GValidation:
    passed: bool
    reason: GFailure = GFailure.NONE
    indices: tuple = ()
    min_sin: Optional[float] = None

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class MepProblem:
    """Coefficient array ``V`` (shape ``(m+1) x (m+2)`` of n-by-n blocks) and ``g``."""

    V: tuple
    g: tuple
    problem: Optional[NepvProblem] = field(default=None, compare=False, repr=False)

    @property
    def l(self) -> int:
        return len(self.V)

    @property
    def n(self) -> int:
        return self.V[0][0].shape[0]

    @property
    def m(self) -> int:
        return self.l - 1

    def row_residual(self, i: int, lam: complex, mu, x) -> float:
        """``||(V_i0 - lam V_i1 - sum mu_j V_i,1+j) x|| / ||x||`` for row ``i`` (0-based)."""
        row = self.V[i]
        y = row[0] @ x - lam * (row[1] @ x)
        for j, mj in enumerate(mu):
            y = y - mj * (row[2 + j] @ x)
        return float(np.linalg.norm(y) / np.linalg.norm(x))


def validate_g(p: NepvProblem, g) -> GValidation:
    """Check that every ``g_i`` is nonzero and, for m >= 2, that they are pairwise independent."""
    g = [np.asarray(gi) for gi in g]
    if len(g) != p.m or any(gi.shape != (p.n,) for gi in g):
        return GValidation(False, GFailure.WRONG_SHAPE)
    zero = tuple(i for i, gi in enumerate(g) if not np.any(gi))
    if zero:
        return GValidation(False, GFailure.ZERO_VECTOR, zero)
    min_sin = None
    for i in range(len(g)):
        for j in range(i + 1, len(g)):
            sij = sin_angle(g[i], g[j])
            min_sin = sij if min_sin is None else min(min_sin, sij)
            if sij <= MIN_PAIRWISE_SIN:
                return GValidation(False, GFailure.PAIRWISE_DEPENDENT, (i, j), sij)
    return GValidation(True, min_sin=min_sin)


def random_g(n: int, m: int, seed: int) -> list:
    """Seeded standard-normal g vectors that always pass :func:`validate_g`."""
    attempt = 0
    while True:
        rng = named_rng(seed, "g", attempt)
        g = [rng.standard_normal(n) for _ in range(m)]
        ok = all(np.any(gi) for gi in g) and all(
            sin_angle(g[i], g[j]) > MIN_PAIRWISE_SIN
            for i in range(m)
            for j in range(i + 1, m)
        )
        if ok:
            return g
        attempt += 1


def build_mep(p: NepvProblem, g) -> MepProblem:
    report = validate_g(p, g)
    if not report:
        if report.reason is GFailure.WRONG_SHAPE:
            raise DimensionMismatch(f"need {p.m} g vectors of length {p.n}")
        raise InvalidG(report)
    g = tuple(np.array(gi) for gi in g)
    first = (-p.A, p.B, *p.C)
    rows = [first]
    for i in range(p.m):
        lhs = -(p.A + np.outer(g[i], p.r[i]))
        coeffs = list(p.C)
        coeffs[i] = p.C[i] - np.outer(g[i], p.s[i])
        rows.append((lhs, p.B, *coeffs))
    V = tuple(tuple(np.array(M) for M in row) for row in rows)
    for row in V:
        for M in row:
            M.flags.writeable = False
    return MepProblem(V=V, g=g, problem=p)
