import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nepv.core import (
    Classification,
    CountOverflow,
    DenominatorNearZero,
    DimensionMismatch,
    NepvProblem,
    SolutionRecord,
    count_solutions,
    f_all,
    f_eval,
    nepv_residual,
    sin_angle,
)
from nepv.problems import gen_random

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
scales = st.tuples(finite, finite).filter(lambda t: math.hypot(*t) > 1e-3)


class TestProblem:
    def test_shapes(self, ex2):
        p, _ = ex2
        assert (p.n, p.m) == (2, 1)
        assert p.dtype == np.float64

    def test_arrays_frozen(self, ex2):
        p, _ = ex2
        with pytest.raises(ValueError):
            p.A[0, 0] = 5.0

    def test_input_is_copied(self):
        A = np.eye(2)
        p = NepvProblem(A, np.eye(2), [np.eye(2)], [np.ones(2)], [np.ones(2)])
        A[0, 0] = 7.0
        assert p.A[0, 0] == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(B=np.eye(3)),
            dict(C=[np.eye(2), np.eye(2)]),
            dict(r=[np.ones(3)]),
            dict(A=np.ones((2, 3))),
        ],
    )
    def test_dimension_mismatch(self, kwargs):
        base = dict(A=np.eye(2), B=np.eye(2), C=[np.eye(2)], r=[np.ones(2)], s=[np.ones(2)])
        base.update(kwargs)
        with pytest.raises(DimensionMismatch):
            NepvProblem(**base)

    def test_zero_s_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            NepvProblem(np.eye(2), np.eye(2), [np.eye(2)], [np.ones(2)], [np.zeros(2)])

    def test_nonfinite_rejected(self):
        A = np.eye(2)
        A[0, 1] = np.nan
        with pytest.raises(ValueError, match="finite"):
            NepvProblem(A, np.eye(2), [np.eye(2)], [np.ones(2)], [np.ones(2)])

    def test_matrix(self, ex2):
        p, _ = ex2
        x = np.array([1.0, 2.0])
        f = (3 + 4) / (4 + 6)
        assert np.allclose(p.matrix(0.5, x), p.A + 0.5 * p.B + f * p.C[0])


class TestFunctionals:
    def test_value(self, ex2):
        p, _ = ex2
        assert f_eval(p, 0, np.array([1.0, 1.0])) == pytest.approx(5 / 7)

    def test_complex_unconjugated(self, ex2):
        p, _ = ex2
        x = np.array([1.0, 1j])
        assert f_eval(p, 0, x) == pytest.approx((3 + 2j) / (4 + 3j))

    def test_denominator_zero(self, ex2):
        p, _ = ex2
        with pytest.raises(DenominatorNearZero):
            f_eval(p, 0, np.array([3.0, -4.0]))

    def test_index_range(self, ex2):
        p, _ = ex2
        with pytest.raises(IndexError):
            f_eval(p, 1, np.ones(2))

    @given(scales, st.integers(0, 50))
    def test_scale_invariance(self, alpha, seed):
        p, _ = gen_random(4, 2, seed)
        x = np.random.default_rng(seed).standard_normal(4)
        a = complex(*alpha)
        assert np.allclose(f_all(p, a * x), f_all(p, x), rtol=1e-12, atol=1e-12)

    @given(scales, st.integers(0, 50))
    def test_residual_scale_invariance(self, alpha, seed):
        p, _ = gen_random(4, 1, seed)
        x = np.random.default_rng(seed).standard_normal(4)
        a = complex(*alpha)
        assert nepv_residual(p, 0.3 - 1j, a * x) == pytest.approx(nepv_residual(p, 0.3 - 1j, x), rel=1e-10)


class TestCount:
    @pytest.mark.parametrize("n,m,expected", [(2, 1, 3), (5, 1, 15), (10, 2, 220), (100, 1, 5050)])
    def test_values(self, n, m, expected):
        assert count_solutions(n, m) == expected

    def test_overflow(self):
        with pytest.raises(CountOverflow):
            count_solutions(200, 40)

    def test_invalid(self):
        with pytest.raises(ValueError):
            count_solutions(0, 1)

    @given(st.integers(1, 30), st.integers(1, 5))
    def test_pascal(self, n, m):
        # C(n+m, m+1) = C(n-1+m, m+1) + C(n-1+m, m)
        assert count_solutions(n, m) == math.comb(n - 1 + m, m + 1) + math.comb(n - 1 + m, m)


class TestSinAngle:
    @given(st.integers(0, 100), scales)
    def test_collinear(self, seed, alpha):
        u = np.random.default_rng(seed).standard_normal(5) + 1j
        assert sin_angle(u, complex(*alpha) * u) < 1e-12

    def test_orthogonal(self):
        assert sin_angle(np.array([1.0, 0]), np.array([0, 1.0])) == pytest.approx(1.0)


def test_record_to_dict_is_json():
    rec = SolutionRecord(1 + 2j, [0.5], np.array([1.0, 1j]), Classification.TRUE, 1e-15)
    doc = json.loads(json.dumps(rec.to_dict()))
    assert doc["lambda"] == [1.0, 2.0]
    assert doc["classification"] == "True"
    assert doc["x"][1] == [0.0, 1.0]
