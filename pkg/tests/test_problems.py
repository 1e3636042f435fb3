import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nepv.core import NepvProblem, nepv_residual
from nepv.dense import solve_all
from nepv.problems import PdeSpec, brute_force_solve, example_2x2, gen_pde, gen_random, pde_grid
from nepv.rng import STREAMS, named_rng

from _support import multiset_distance


class TestRng:
    def test_vectors(self):
        # PCG64 via SeedSequence(entropy=seed, spawn_key=(stream, index))
        np.testing.assert_allclose(named_rng(0, "A").standard_normal(2), [0.78590677, -0.91995296], atol=5e-9)
        np.testing.assert_allclose(named_rng(3, "x0", 2).random(2), [0.56163856, 0.15917408], atol=5e-9)

    def test_streams_independent(self):
        a = named_rng(0, "A").standard_normal(4)
        b = named_rng(0, "B").standard_normal(4)
        c = named_rng(0, "A", 1).standard_normal(4)
        assert not np.allclose(a, b) and not np.allclose(a, c)

    def test_stream_codes_unique(self):
        assert len(set(STREAMS.values())) == len(STREAMS)


class TestGenRandom:
    @given(st.integers(2, 6), st.integers(1, 3), st.integers(0, 2**31))
    def test_deterministic(self, n, m, seed):
        (p1, g1), (p2, g2) = gen_random(n, m, seed), gen_random(n, m, seed)
        assert np.array_equal(p1.A, p2.A) and np.array_equal(p1.B, p2.B)
        assert all(np.array_equal(a, b) for a, b in zip(p1.C + p1.r + p1.s, p2.C + p2.r + p2.s))
        assert all(np.array_equal(a, b) for a, b in zip(g1, g2))

    def test_seeds_differ(self):
        assert not np.allclose(gen_random(3, 1, 0)[0].A, gen_random(3, 1, 1)[0].A)

    def test_invalid(self):
        with pytest.raises(ValueError):
            gen_random(1, 1, 0)


class TestPde:
    def test_default_size(self):
        p = gen_pde()
        h = 2 / 101
        assert (p.n, p.m) == (100, 1)
        b = p.s[0]
        assert np.flatnonzero(b).tolist() == [49, 50]
        assert b[49] == pytest.approx(-1 / h) and b[50] == pytest.approx(1 / h)
        assert abs(b[50]) == pytest.approx(50.5)
        x = pde_grid(100)
        assert x[49] == pytest.approx(-h / 2) and x[50] == pytest.approx(h / 2)

    def test_structure(self):
        p = gen_pde()
        A, K1, K2, a = p.A, p.B, p.C[0], p.r[0]
        assert np.array_equal(A, A.T) and np.count_nonzero(np.triu(A, 2)) == 0
        for K in (K1, K2):
            assert np.count_nonzero(K - np.diag(np.diag(K))) == 0
            assert np.all((np.diag(K) >= 0.5) & (np.diag(K) <= 1.5))
        assert np.all(a > 0)

    def test_odd_n_centered_difference(self):
        p = gen_pde(PdeSpec(n=101))
        h = 2 / 102
        c = 50
        assert pde_grid(101)[c] == pytest.approx(0.0, abs=1e-15)
        assert np.flatnonzero(p.s[0]).tolist() == [c - 1, c + 1]
        assert p.s[0][c + 1] == pytest.approx(1 / (2 * h))

    def test_gaussian_decay(self):
        p = gen_pde(PdeSpec(n=100, gamma=100))
        x, h = pde_grid(100), 2 / 101
        assert np.all(p.r[0][np.abs(x) > 0.5] / h < 1e-6)

    def test_laplacian_limit(self):
        spec = PdeSpec(n=100, k1=lambda x: 1 + 0 * x, k2=lambda x: 0 * x)
        p = gen_pde(spec)
        lam1 = np.sort(np.linalg.eigvalsh(-p.A))[0]
        assert lam1 == pytest.approx((np.pi / 2) ** 2, abs=1e-3)

    def test_min_size(self):
        with pytest.raises(ValueError):
            PdeSpec(n=2)


class TestOracle:
    def test_worked_example(self):
        p, _ = example_2x2()
        res = brute_force_solve(p)
        assert res.method == "resultant"
        assert np.allclose(sorted(res.lambdas.real), [-0.436672, -0.422434, 5.246203], atol=1e-6)

    def test_decoupled_diagonal(self):
        p = NepvProblem(np.diag([-1.0, -2.0]), np.eye(2), [np.zeros((2, 2))], [np.array([1.0, 1.0])],
                        [np.array([1.0, 2.0])])
        res = brute_force_solve(p)
        assert np.allclose(sorted(res.lambdas.real), [1.0, 2.0])
        assert all(not s.mu_identifiable for s in res)

    def test_sweep_counts(self):
        counts = [len(brute_force_solve(gen_random(2, 1, seed)[0])) for seed in range(50)]
        assert max(counts) <= 3
        assert sum(c == 3 for c in counts) >= 48

    @pytest.mark.parametrize("seed", range(5))
    def test_residuals(self, seed):
        p, _ = gen_random(2, 1, seed)
        for s in brute_force_solve(p):
            assert nepv_residual(p, s.lam, s.x) < 1e-10

    def test_multistart_matches_dense(self):
        p, g = gen_random(3, 1, 0)
        res = brute_force_solve(p, seed=0)
        assert res.method == "multistart" and res.complete
        dense = [r.lam for r in solve_all(p, g=g).true_records]
        assert multiset_distance(res.lambdas, dense) < 1e-8

    def test_too_large(self):
        with pytest.raises(ValueError):
            brute_force_solve(gen_random(7, 1, 0)[0])
