import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nepv.core import Classification, NepvProblem, count_solutions, nepv_residual
from nepv.dense import (
    SingularPencil,
    DegenerateRayleigh,
    extract_nepv_solutions,
    factor_rank_one,
    fix_phase,
    kron_all,
    mu_from_rayleigh,
    solve_all,
    solve_gep,
)
from nepv.linearize import build_mep
from nepv.opdet import build_deltas
from nepv.problems import PdeSpec, gen_pde, gen_random
from nepv.core import sin_angle

complex_vec = st.integers(0, 10_000).map(
    lambda s: np.random.default_rng(s).standard_normal(4) + 1j * np.random.default_rng(s + 1).standard_normal(4)
)


class TestSolveGep:
    def test_diagonal_pencil(self):
        D1 = np.diag([1.0, 2.0, 3.0])
        D0 = np.diag([1.0, 4.0, 1.0])
        lams = sorted(pr.lam.real for pr in solve_gep(D1, D0))
        assert np.allclose(lams, [0.5, 1.0, 3.0])

    def test_backward_error_and_left(self):
        rng = np.random.default_rng(0)
        D1, D0 = rng.standard_normal((6, 6)), rng.standard_normal((6, 6))
        for pr in solve_gep(D1, D0, left=True):
            assert pr.backward_error < 1e-13
            w = pr.left_w
            assert np.linalg.norm(w @ D1 - pr.lam * (w @ D0)) < 1e-10 * np.linalg.norm(D1)

    def test_singular_delta0(self):
        with pytest.raises(SingularPencil):
            solve_gep(np.eye(2), np.diag([1.0, 0.0]))

    def test_pde_delta0_is_singular(self):
        # e_i (x) e_i with b_i = 0 lies in the kernel of Delta0
        p = gen_pde(PdeSpec(n=6))
        with pytest.raises(SingularPencil):
            solve_all(p, g_seed=0)


class TestFactorization:
    @given(complex_vec)
    def test_fix_phase(self, x):
        y = fix_phase(x)
        k = np.argmax(np.abs(y))
        assert np.linalg.norm(y) == pytest.approx(1.0)
        assert y[k].imag == 0 and y[k].real > 0
        assert sin_angle(x, y) < 1e-12

    def test_fix_phase_real_output(self):
        assert np.isrealobj(fix_phase(np.array([-1.0, 2.0])))

    @given(st.integers(0, 10_000), st.integers(1, 3), st.integers(2, 5))
    def test_rank_one_recovered(self, seed, m, n):
        rng = np.random.default_rng(seed)
        xs = [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(m + 1)]
        fac = factor_rank_one(kron_all(xs) * (0.3 - 2j), n, m)
        assert fac.fit < 1e-10 and fac.decomposable
        for a, b in zip(fac.factors, xs):
            assert sin_angle(a, b) < 1e-8

    @given(st.integers(0, 10_000), st.integers(1, 2))
    def test_symmetric_detected(self, seed, m):
        x = np.random.default_rng(seed).standard_normal(3)
        fac = factor_rank_one(kron_all([x] * (m + 1)), 3, m)
        assert fac.symmetric and fac.symmetry_defect < 1e-10

    def test_sum_not_decomposable(self):
        e = np.eye(3)
        fac = factor_rank_one(np.kron(e[0], e[0]) + np.kron(e[1], e[1]), 3, 1)
        assert not fac.decomposable and not fac.symmetric
        assert fac.fit == pytest.approx(np.sqrt(0.5))

    def test_non_symmetric_rank_one(self):
        e = np.eye(3)
        fac = factor_rank_one(np.kron(e[0], e[1]), 3, 1)
        assert fac.decomposable and not fac.symmetric

    def test_bad_length(self):
        with pytest.raises(ValueError):
            factor_rank_one(np.ones(5), 2, 1)


class TestWorkedExample:
    PRINTED = {
        5.2462: ([-0.8232, 0.5677], [-0.8232, 0.5677]),
        -0.4224: ([-0.5637, 0.8260], [-0.5637, 0.8260]),
        -0.4367: ([-0.0672, 0.9977], [-0.0672, 0.9977]),
        # listed as (row-2 factor, row-1 factor); z = x1 (x) x2 with x1 solving row 1
        -1.2500: ([0.7682, -0.6402], [-0.4706, 0.8824]),
    }

    def test_eigenvectors(self, ex2_solution):
        _, sol = ex2_solution
        for pr in sol.pairs:
            key = min(self.PRINTED, key=lambda v: abs(v - pr.lam))
            assert abs(pr.lam - key) < 5e-5
            x1, x2 = self.PRINTED[key]
            assert sin_angle(pr.z, np.kron(x1, x2)) < 1e-3

    def test_row_one_factor_of_fourth_pair(self, ex2_solution):
        _, sol = ex2_solution
        (rec,) = [r for r in sol.records if abs(r.lam + 1.25) < 1e-8]
        assert sol.mep.row_residual(0, rec.lam, rec.mu, rec.x) < 1e-12
        assert sin_angle(rec.x, np.array([0.7682, -0.6402])) < 1e-4

    def test_classes(self, ex2_solution):
        p, sol = ex2_solution
        true = sorted(r.lam.real for r in sol.true_records)
        assert np.allclose(true, [-0.436672, -0.422434, 5.246203], atol=1e-6)
        (bad,) = [r for r in sol.records if r.classification is not Classification.TRUE]
        assert bad.lam == pytest.approx(-1.25)
        assert bad.diagnostics["g_dot_y"][0] < 1e-8
        assert any("g_1" in f for f in bad.diagnostics["failed"])
        for r in sol.true_records:
            assert r.residual < 1e-12
            assert r.mu[0] == pytest.approx((p.r[0] @ r.x) / (p.s[0] @ r.x))

    def test_mu_rayleigh(self, ex2_solution):
        _, sol = ex2_solution
        ds = sol.deltas
        for pr in sol.pairs:
            rec = min(sol.records, key=lambda r: abs(r.lam - pr.lam))
            assert mu_from_rayleigh(pr.z, ds.Delta[1], ds.Delta0) == pytest.approx(rec.mu[0], abs=1e-8)

    def test_degenerate_rayleigh(self):
        with pytest.raises(DegenerateRayleigh):
            mu_from_rayleigh(np.array([1.0, 0.0]), np.eye(2), np.diag([0.0, 1.0]))

    @pytest.mark.parametrize("g_seed", [1, 2, 3])
    def test_true_solutions_independent_of_g(self, ex2_solution, g_seed):
        p, sol = ex2_solution
        other = solve_all(p, g_seed=g_seed)
        a = sorted(r.lam.real for r in sol.true_records)
        b = sorted(r.lam.real for r in other.true_records)
        assert np.allclose(a, b, atol=1e-10)


def spurious_instance(seed=0, n=3):
    """Problem with a symmetric MEP solution ``x (x) x`` where ``s^T x = 0``.

    ``r`` is parallel to ``s``, so both vanish on ``x`` and every MEP row reduces
    to ``(A + lam B + mu C) x = 0``, which ``A`` is built to satisfy.
    """
    rng = np.random.default_rng(seed)
    B, C, A0 = (rng.standard_normal((n, n)) for _ in range(3))
    x = rng.standard_normal(n)
    s = rng.standard_normal(n)
    s = s - (s @ x) / (x @ x) * x
    lam, mu = 0.7, -1.3
    A = A0 - np.outer(A0 @ x + lam * (B @ x) + mu * (C @ x), x) / (x @ x)
    return NepvProblem(A, B, [C], [2.0 * s], [s]), x, lam


class TestClassification:
    def test_spurious_denominator(self):
        p, x, lam = spurious_instance()
        sol = solve_all(p, g_seed=0)
        rec = min(sol.records, key=lambda r: abs(r.lam - lam))
        assert abs(rec.lam - lam) < 1e-8
        assert rec.classification is Classification.SPURIOUS
        assert sin_angle(rec.x, x) < 1e-8
        assert any("s_1" in f for f in rec.diagnostics["failed"])

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_counts_m2(self, seed):
        p, g = gen_random(4, 2, seed)
        sol = solve_all(p, g=g)
        assert len(sol.pairs) == 64
        assert len(sol.true_records) == count_solutions(4, 2)

    def test_seed_42_counts(self):
        p, g = gen_random(5, 1, 42)
        sol = solve_all(p, g=g)
        assert len(sol.pairs) == 25
        assert len(sol.true_records) == 15
        assert len(sol.by_class(Classification.NON_SYMMETRIC)) == 10

    def test_extract_without_diagnosis(self):
        p, g = gen_random(3, 1, 5)
        mep = build_mep(p, g)
        ds = build_deltas(mep)
        recs = extract_nepv_solutions(p, mep, ds, diagnose=False)
        assert all(r.diagnostics is None for r in recs)
        for r in recs:
            if r.classification is Classification.TRUE:
                assert nepv_residual(p, r.lam, r.x) < 1e-8
