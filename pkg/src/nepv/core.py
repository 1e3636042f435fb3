"""Problem model, nonlinear functionals and residuals.

A problem of the form

    (A + lam*B + f_1(x) C_1 + ... + f_m(x) C_m) x = 0,   f_i(x) = r_i^T x / s_i^T x

is stored as a frozen :class:`NepvProblem`.  All bilinear forms ``v^T x`` are
unconjugated, also for complex data; conjugation appears only in norms.

Matrices are plain numpy arrays.  Wherever a matrix is identified with a
vector (Kronecker products, ``vec``) the column-major convention is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

TOL_S = 1e-12
TOL_ACCEPT = 1e-8


class NepvError(Exception):
    """Base class for all solver errors."""


class DimensionMismatch(NepvError, ValueError):
    pass


class DenominatorNearZero(NepvError, ZeroDivisionError):
    """Raised when ``|s_i^T x|`` is too small to evaluate ``f_i``."""


class CountOverflow(NepvError, OverflowError):
    pass


def _as_vector(v, n: int, name: str) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise DimensionMismatch(f"{name} must have shape ({n},), got {arr.shape}")
    return arr


def _as_square(M, n: int, name: str) -> np.ndarray:
    arr = np.asarray(M)
    if arr.shape != (n, n):
        raise DimensionMismatch(f"{name} must have shape ({n}, {n}), got {arr.shape}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    if not np.issubdtype(out.dtype, np.inexact):
        out = out.astype(float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class NepvProblem:
    """Coefficients ``A, B, C_i, r_i, s_i`` of a rational-linear NEPv."""

    A: np.ndarray
    B: np.ndarray
    C: tuple
    r: tuple
    s: tuple

    def __post_init__(self):
        A = np.asarray(self.A)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise DimensionMismatch(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        if not (len(self.C) == len(self.r) == len(self.s)) or len(self.C) < 1:
            raise DimensionMismatch(
                f"need m >= 1 and equal counts of C, r, s; got "
                f"{len(self.C)}, {len(self.r)}, {len(self.s)}"
            )
        B = _as_square(self.B, n, "B")
        C = tuple(_freeze(_as_square(Ci, n, f"C[{i}]")) for i, Ci in enumerate(self.C))
        r = tuple(_freeze(_as_vector(ri, n, f"r[{i}]")) for i, ri in enumerate(self.r))
        s = tuple(_freeze(_as_vector(si, n, f"s[{i}]")) for i, si in enumerate(self.s))
        for i, si in enumerate(s):
            if not np.any(si):
                raise ValueError(f"s[{i}] must be a nonzero vector")
        data = [A, B, *C, *r, *s]
        if not all(np.all(np.isfinite(d)) for d in data):
            raise ValueError("problem data must be finite")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "B", _freeze(B))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return len(self.C)

    @property
    def dtype(self):
        return np.result_type(self.A, self.B, *self.C, *self.r, *self.s)

    def matrix(self, lam: complex, x: np.ndarray) -> np.ndarray:
        """``A + lam B + sum_i f_i(x) C_i``."""
        T = self.A + lam * self.B
        for i, Ci in enumerate(self.C):
            T = T + f_eval(self, i, x) * Ci
        return T


class Classification(str, Enum):
    TRUE = "True"
    SPURIOUS = "Spurious"
    NON_SYMMETRIC = "NonSymmetric"
    UNKNOWN = "Unknown"


@dataclass
class SolutionRecord:
    """One eigentuple ``(lam, mu_1..mu_m, x)`` recovered from the linearization."""

    lam: complex
    mu: list
    x: np.ndarray
    classification: Classification
    residual: float
    diagnostics: Optional[dict] = None
    fit: float = 0.0
    symmetry_defect: float = 0.0

    def to_dict(self) -> dict:
        return {
            "lambda": [float(np.real(self.lam)), float(np.imag(self.lam))],
            "mu": [[float(np.real(u)), float(np.imag(u))] for u in self.mu],
            "x": [[float(v.real), float(v.imag)] for v in np.asarray(self.x, dtype=complex)],
            "classification": self.classification.value,
            "residual": float(self.residual),
            "fit": float(self.fit),
            "symmetry_defect": float(self.symmetry_defect),
            "diagnostics": self.diagnostics,
        }


def f_eval(p: NepvProblem, i: int, x, tol_s: float = TOL_S) -> complex:
    """Evaluate ``f_i(x) = r_i^T x / s_i^T x`` (``i`` is 0-based)."""
    if not 0 <= i < p.m:
        raise IndexError(f"term index {i} out of range for m={p.m}")
    x = np.asarray(x)
    den = p.s[i] @ x
    if abs(den) <= tol_s * np.linalg.norm(p.s[i]) * np.linalg.norm(x):
        raise DenominatorNearZero(f"|s_{i + 1}^T x| = {abs(den):.3e} is too small")
    return (p.r[i] @ x) / den


def f_all(p: NepvProblem, x, tol_s: float = TOL_S) -> np.ndarray:
    return np.array([f_eval(p, i, x, tol_s) for i in range(p.m)])


def nepv_residual(p: NepvProblem, lam: complex, x, tol_s: float = TOL_S) -> float:
    """Relative residual, invariant under scaling of ``x``.

    ``||(A + lam B + sum f_i(x) C_i) x|| /
    ((||A||_F + |lam| ||B||_F + sum |f_i(x)| ||C_i||_F) ||x||)``
    """
    x = np.asarray(x)
    fs = f_all(p, x, tol_s)
    Tx = p.A @ x + lam * (p.B @ x)
    scale = np.linalg.norm(p.A) + abs(lam) * np.linalg.norm(p.B)
    for fi, Ci in zip(fs, p.C):
        Tx = Tx + fi * (Ci @ x)
        scale += abs(fi) * np.linalg.norm(Ci)
    return float(np.linalg.norm(Tx) / (scale * np.linalg.norm(x)))


def count_solutions(n: int, m: int) -> int:
    """Bezout bound ``binomial(n + m, m + 1)`` on isolated solutions."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    N_s = math.comb(n + m, m + 1)
    if N_s > 2**63 - 1:
        raise CountOverflow(f"binomial({n + m}, {m + 1}) exceeds 2^63 - 1")
    return N_s


def normalize(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x)


def sin_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Sine of the angle between the complex lines spanned by ``u`` and ``v``."""
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    # projection residual; accurate for nearly parallel vectors
    return float(min(1.0, np.linalg.norm(u - v * np.vdot(v, u))))
