"""Seeded test problems and an independent brute-force oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from nepv.core import (
    DenominatorNearZero,
    NepvError,
    NepvProblem,
    count_solutions,
    f_all,
    nepv_residual,
    sin_angle,
)
from nepv.rng import named_rng


def gen_random(n: int, m: int, seed: int):
    """Standard-normal ``A, B, C_i, r_i, s_i`` and ``g_i``, one PCG64 stream per object."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    A = named_rng(seed, "A").standard_normal((n, n))
    B = named_rng(seed, "B").standard_normal((n, n))
    C = [named_rng(seed, "C", i).standard_normal((n, n)) for i in range(m)]
    r = [named_rng(seed, "r", i).standard_normal(n) for i in range(m)]
    s = [named_rng(seed, "s", i).standard_normal(n) for i in range(m)]
    from nepv.linearize import random_g

    return NepvProblem(A, B, C, r, s), random_g(n, m, seed)


def example_2x2():
    """The 2 x 2 worked example with integer data and its ``g``."""
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    B = np.array([[1.0, 2.0], [3.0, 4.0]])
    C = np.array([[2.0, 0.0], [0.0, 1.0]])
    r = np.array([3.0, 2.0])
    s = np.array([4.0, 3.0])
    g = np.array([1.0, 3.0])
    return NepvProblem(A, B, [C], [r], [s]), [g]


def _k1(x):
    return 1 + np.tanh(5 * x) / 2


def _k2(x):
    return 1 + np.cos(np.pi * x) / 2


@dataclass(frozen=True)
class PdeSpec:
    """``u'' + lam k1 u + (alpha(u)/beta(u)) k2 u = 0`` on [-1, 1], ``u(+-1) = 0``.

    ``alpha(u)`` is the integral of ``exp(-gamma x^2) u`` and ``beta(u) = u'(0)``.
    ``n`` counts interior grid points.
    """

    n: int = 100
    gamma: float = 10.0
    k1: Callable = field(default=_k1, compare=False)
    k2: Callable = field(default=_k2, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need n >= 3 interior points")


def pde_grid(n: int) -> np.ndarray:
    h = 2.0 / (n + 1)
    return -1.0 + h * np.arange(1, n + 1)


def gen_pde(spec: PdeSpec = PdeSpec()) -> NepvProblem:
    n = spec.n
    h = 2.0 / (n + 1)
    x = pde_grid(n)
    A = (np.diag(np.full(n - 1, 1.0), -1) - 2 * np.eye(n) + np.diag(np.full(n - 1, 1.0), 1)) / h**2
    K1 = np.diag(spec.k1(x) * np.ones(n))
    K2 = np.diag(spec.k2(x) * np.ones(n))
    # trapezoid with zero boundary values: uniform interior weight h
    a = h * np.exp(-spec.gamma * x**2)
    b = np.zeros(n)
    if n % 2 == 0:
        b[n // 2] = 1.0 / h
        b[n // 2 - 1] = -1.0 / h
    else:
        c = (n - 1) // 2  # 0-based index of the node at x = 0
        b[c + 1] = 1.0 / (2 * h)
        b[c - 1] = -1.0 / (2 * h)
    return NepvProblem(A, K1, [K2], [a], [b])


class OracleIncomplete(NepvError):
    pass


@dataclass
class OracleSolution:
    lam: complex
    mu: list
    x: np.ndarray
    mu_identifiable: bool = True


@dataclass
class OracleResult:
    solutions: list
    method: str
    bound: int
    complete: Optional[bool] = None

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s.lam for s in self.solutions])


def _dedup(sols: list, tol: float = 1e-8) -> list:
    kept = []
    for s in sols:
        if not any(
            abs(k.lam - s.lam) <= tol * (1 + abs(s.lam)) and sin_angle(k.x, s.x) <= 1e-6
            for k in kept
        ):
            kept.append(s)
    return kept


def _closed_form_2x1(p: NepvProblem, tol: float) -> list:
    """All solutions of a 2 x 2, m = 1 problem by elimination.

    With ``x = (1, t)`` and denominators cleared, each row reads
    ``a_k(t) + lam b_k(t) = 0``.  Eliminating ``lam`` leaves a cubic in ``t``,
    solved through its companion matrix; ``x = (0, 1)`` is checked separately.
    """
    A, B, C = p.A, p.B, p.C[0]
    r, s = p.r[0], p.s[0]
    # polynomial coefficients in t, lowest degree first
    d = np.array([s[0], s[1]], dtype=complex)
    num = np.array([r[0], r[1]], dtype=complex)

    def row_poly(M, k):
        return np.array([M[k, 0], M[k, 1]], dtype=complex)

    a = [P.polyadd(P.polymul(d, row_poly(A, k)), P.polymul(num, row_poly(C, k))) for k in range(2)]
    b = [row_poly(B, k) for k in range(2)]
    cubic = P.polysub(P.polymul(a[0], b[1]), P.polymul(a[1], b[0]))
    cubic = np.trim_zeros(cubic, "b")
    candidates = []
    if len(cubic) > 1:
        lead = cubic[-1]
        companion = np.zeros((len(cubic) - 1,) * 2, dtype=complex)
        companion[1:, :-1] = np.eye(len(cubic) - 2)
        companion[:, -1] = -cubic[:-1] / lead
        for t in np.linalg.eigvals(companion):
            candidates.append(np.array([1.0, t]))
    candidates.append(np.array([0.0, 1.0]))

    sols = []
    for x in candidates:
        nx = np.linalg.norm(x)
        if abs(s @ x) <= tol * np.linalg.norm(s) * nx:
            continue
        mu = (r @ x) / (s @ x)
        lhs = B @ x
        if not np.any(lhs):
            continue
        rhs = -(A @ x + mu * (C @ x))
        lam = np.vdot(lhs, rhs) / np.vdot(lhs, lhs)
        try:
            res = nepv_residual(p, lam, x)
        except DenominatorNearZero:
            continue
        if res < 1e-8:
            sols.append(OracleSolution(complex(lam), [complex(mu)], x / nx))
    return sols


def _newton_polish(p: NepvProblem, x, lam, v, iters: int = 50, tol: float = 1e-14):
    """Damped Newton on ``[(A + lam B + sum f_i(x) C_i) x; v^T x - 1] = 0``."""
    n = p.n

    def F(x, lam):
        fs = f_all(p, x)
        Tx = p.A @ x + lam * (p.B @ x) + sum(fi * (Ci @ x) for fi, Ci in zip(fs, p.C))
        return np.concatenate([Tx, [v @ x - 1.0]]), fs

    Fx, fs = F(x, lam)
    for _ in range(iters):
        J = np.zeros((n + 1, n + 1), dtype=complex)
        T = p.A + lam * p.B
        for fi, Ci, ri, si in zip(fs, p.C, p.r, p.s):
            grad = (ri - fi * si) / (si @ x)
            T = T + fi * Ci + np.outer(Ci @ x, grad)
        J[:n, :n] = T
        J[:n, n] = p.B @ x
        J[n, :n] = v
        try:
            step = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError:
            return None
        norm0 = np.linalg.norm(Fx)
        t = 1.0
        while t > 1e-4:
            xn, ln = x + t * step[:n], lam + t * step[n]
            try:
                Fn, fsn = F(xn, ln)
            except DenominatorNearZero:
                t /= 2
                continue
            if np.linalg.norm(Fn) < (1 - 1e-4 * t) * norm0 or t == 1.0 and norm0 < 1e-10:
                break
            t /= 2
        else:
            return None
        x, lam, Fx, fs = xn, ln, Fn, fsn
        if np.linalg.norm(Fx) < tol * (1 + np.linalg.norm(x)):
            break
    return x, lam


def _multistart(p: NepvProblem, seed: int, starts: Optional[int]) -> list:
    N_s = count_solutions(p.n, p.m)
    starts = 200 * N_s if starts is None else starts
    rng = named_rng(seed, "oracle")
    sols = []
    for _ in range(starts):
        x = rng.standard_normal(p.n) + 1j * rng.standard_normal(p.n)
        v = rng.standard_normal(p.n) + 1j * rng.standard_normal(p.n)
        x = x / (v @ x)
        try:
            lam = np.vdot(p.B @ x, -(p.A @ x + sum(fi * (Ci @ x) for fi, Ci in zip(f_all(p, x), p.C))))
            lam /= np.vdot(p.B @ x, p.B @ x)
            out = _newton_polish(p, x, lam, v)
        except DenominatorNearZero:
            continue
        if out is None:
            continue
        x, lam = out
        try:
            if nepv_residual(p, lam, x) >= 1e-12:
                continue
            mu = list(f_all(p, x))
        except DenominatorNearZero:
            continue
        sols.append(OracleSolution(complex(lam), [complex(u) for u in mu], x / np.linalg.norm(x)))
        sols = _dedup(sols)
        if len(sols) >= N_s:
            break
    return sols


def brute_force_solve(
    p: NepvProblem, seed: int = 0, starts: Optional[int] = None, tol_s: float = 1e-12
) -> OracleResult:
    """All isolated solutions of a small NEPv, independent of the linearization.

    ``n = 2, m = 1`` uses exact elimination to a cubic; other small problems
    (``n (m + 1) <= 12``) use seeded multistart Newton, which is heuristic.
    """
    N_s = count_solutions(p.n, p.m)
    mu_ok = any(np.any(Ci) for Ci in p.C)
    if p.n == 2 and p.m == 1:
        sols = _dedup(_closed_form_2x1(p, tol_s))
        method = "resultant"
        complete = None
    elif p.n * (p.m + 1) <= 12:
        sols = _multistart(p, seed, starts)
        method = "multistart"
        complete = len(sols) >= N_s
    else:
        raise ValueError("brute_force_solve supports n = 2, m = 1 or n (m + 1) <= 12")
    for s in sols:
        s.mu_identifiable = mu_ok
    sols.sort(key=lambda s: (s.lam.real, s.lam.imag))
    return OracleResult(solutions=sols, method=method, bound=N_s, complete=complete)
