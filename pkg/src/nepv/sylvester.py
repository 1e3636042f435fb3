"""Generalized Sylvester equations ``M1 Z N1 - M2 Z N2 = R`` by QZ.

Both pencils are reduced to complex generalized Schur form,

    M1 = Q1 S1 Z1^H,  M2 = Q1 T1 Z1^H,  N1^T = Q2 S2 Z2^H,  N2^T = Q2 T2 Z2^H,

which turns the equation into ``S1 Y S2^T - T1 Y T2^T = F`` with triangular
coefficients.  ``Y`` is then found one column at a time, last column first,
each column costing one triangular solve.  Total work is O(n^3).
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from nepv.core import NepvError


class SingularSylvesterOperator(NepvError, np.linalg.LinAlgError):
    pass


class GeneralizedSylvester:
    """Reusable solver for fixed ``(M1, M2, N1, N2)`` and many right-hand sides."""

    def __init__(self, M1, M2, N1, N2):
        S1, T1, Q1, Z1 = sla.qz(M1, M2, output="complex")
        S2, T2, Q2, Z2 = sla.qz(np.transpose(N1), np.transpose(N2), output="complex")
        self.S1, self.T1, self.Q1, self.Z1 = S1, T1, Q1, Z1
        self.S2, self.T2, self.Q2, self.Z2 = S2, T2, Q2, Z2
        d1s, d1t = np.diag(S1), np.diag(T1)
        d2s, d2t = np.diag(S2), np.diag(T2)
        # eigenvalues of the operator: S2[j,j] S1[i,i] - T2[j,j] T1[i,i]
        gaps = np.abs(np.outer(d1s, d2s) - np.outer(d1t, d2t))
        local = np.abs(np.outer(d1s, d2s)) + np.abs(np.outer(d1t, d2t))
        # singular only when a diagonal entry cancels below its own roundoff
        self.min_relative_gap = float((gaps / np.where(local > 0, local, 1.0)).min())
        if self.min_relative_gap <= np.finfo(float).eps:
            raise SingularSylvesterOperator("Sylvester operator is numerically singular")

    def solve(self, R: np.ndarray) -> np.ndarray:
        S1, T1, S2, T2 = self.S1, self.T1, self.S2, self.T2
        F = self.Q1.conj().T @ R @ np.conj(self.Q2)
        n1, n2 = F.shape
        Y = np.zeros((n1, n2), dtype=complex)
        for j in range(n2 - 1, -1, -1):
            rhs = F[:, j]
            if j + 1 < n2:
                rhs = rhs - S1 @ (Y[:, j + 1:] @ S2[j, j + 1:]) + T1 @ (Y[:, j + 1:] @ T2[j, j + 1:])
            Y[:, j] = sla.solve_triangular(S2[j, j] * S1 - T2[j, j] * T1, rhs, check_finite=False)
        return self.Z1 @ Y @ self.Z2.T


def solve_generalized_sylvester(M1, M2, N1, N2, R) -> np.ndarray:
    """Solve ``M1 Z N1 - M2 Z N2 = R`` for ``Z``."""
    return GeneralizedSylvester(M1, M2, N1, N2).solve(R)
