import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import central_fd_gradient
from subnewton.problem import (
    Dataset,
    QuadraticSpec,
    make_logistic,
    make_quadratic,
    make_semidefinite_quadratic,
    subsampled_gradient,
    subsampled_hessvec,
    subsampled_value,
    testing_error as held_out_error,
)


def logistic_component_exact(a, b, lam, x):
    """Component value straight from c(x) = 1 + exp(-b a'x); fine for small margins."""
    c = 1.0 + math.exp(-b * float(a @ x))
    return math.log(c) + lam * float(x @ x)


class TestSubsampledValue:
    def test_logistic_at_origin_is_log2(self, small_logistic):
        x = np.zeros(10)
        assert subsampled_value(small_logistic, [0, 3, 7], x) == pytest.approx(math.log(2), abs=1e-15)
        assert subsampled_value(small_logistic, None, x) == pytest.approx(math.log(2), abs=1e-15)

    def test_quadratic_minimum_value(self, small_quadratic):
        q = small_quadratic
        assert subsampled_value(q, np.arange(q.N), q.x_star) == pytest.approx(q.f_star, abs=1e-14)

    def test_matches_brute_force_mean(self, rng):
        q = make_quadratic(QuadraticSpec(n=5, N=10, seed=9))
        x = rng.standard_normal(5)
        S = rng.choice(10, size=3, replace=False)
        brute = sum(q.value_i(i, x) for i in S) / 3
        # brute force per component from the defining formula
        by_hand = 0.0
        for i in S:
            H = (q.Q * q.curvatures[i]) @ q.Q.T
            d = x - q.x_star
            by_hand += 0.5 * d @ H @ d + q.shifts[i]
        by_hand /= 3
        assert subsampled_value(q, S, x) == pytest.approx(by_hand, rel=1e-13)
        assert brute == pytest.approx(by_hand, rel=1e-13)

    def test_logistic_matches_exact_formula(self, small_logistic, rng):
        x = 0.3 * rng.standard_normal(10)
        A, b, lam = small_logistic.data.features, small_logistic.data.labels, small_logistic.lam
        S = [1, 4, 5, 19]
        expected = np.mean([logistic_component_exact(A[i], b[i], lam, x) for i in S])
        assert subsampled_value(small_logistic, S, x) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("bad", [[], [-1], [20], [0.5]])
    def test_bad_samples_rejected(self, small_logistic, bad):
        with pytest.raises(ValueError):
            subsampled_value(small_logistic, np.array(bad), np.zeros(10))

    def test_mean_decomposition(self, small_logistic, rng):
        x = rng.standard_normal(10)
        perm = rng.permutation(20)
        S1, S2 = perm[:7], perm[7:12]
        v1 = subsampled_value(small_logistic, S1, x)
        v2 = subsampled_value(small_logistic, S2, x)
        v12 = subsampled_value(small_logistic, np.concatenate([S1, S2]), x)
        assert v12 == pytest.approx((7 * v1 + 5 * v2) / 12, abs=1e-12)


class TestSubsampledGradient:
    def test_logistic_at_origin(self, small_logistic):
        S = np.array([2, 5, 11])
        A, b = small_logistic.data.features, small_logistic.data.labels
        expected = -np.mean([0.5 * b[i] * A[i] for i in S], axis=0)
        np.testing.assert_allclose(subsampled_gradient(small_logistic, S, np.zeros(10)), expected,
                                   atol=1e-15)

    def test_quadratic_zero_at_minimizer(self, small_quadratic):
        g = subsampled_gradient(small_quadratic, None, small_quadratic.x_star)
        assert np.linalg.norm(g) <= 1e-12

    @pytest.mark.parametrize("which", ["logistic", "quadratic"])
    def test_finite_differences(self, which, small_logistic, small_quadratic, rng):
        prob = small_logistic if which == "logistic" else small_quadratic
        for _ in range(5):
            x = rng.standard_normal(prob.n)
            S = rng.choice(prob.N, size=4, replace=False)
            g = subsampled_gradient(prob, S, x)
            fd = central_fd_gradient(lambda y: subsampled_value(prob, S, y), x)
            assert np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g)) <= 1e-6


class TestSubsampledHessvec:
    def test_zero_vector(self, small_logistic, rng):
        x = rng.standard_normal(10)
        np.testing.assert_array_equal(subsampled_hessvec(small_logistic, [0, 1], x, np.zeros(10)), 0.0)

    def test_logistic_at_origin(self, small_logistic, rng):
        v = rng.standard_normal(10)
        A, lam = small_logistic.data.features, small_logistic.lam
        S = [3, 8]
        expected = np.mean([0.25 * (A[i] @ v) * A[i] + 2 * lam * v for i in S], axis=0)
        np.testing.assert_allclose(subsampled_hessvec(small_logistic, S, np.zeros(10), v), expected,
                                   rtol=1e-14, atol=1e-15)

    @pytest.mark.parametrize("which", ["logistic", "quadratic"])
    def test_finite_differences(self, which, small_logistic, small_quadratic, rng):
        prob = small_logistic if which == "logistic" else small_quadratic
        for _ in range(5):
            x = rng.standard_normal(prob.n)
            v = rng.standard_normal(prob.n)
            S = rng.choice(prob.N, size=5, replace=False)
            hv = subsampled_hessvec(prob, S, x, v)
            h = 1e-6 * (1 + np.linalg.norm(x)) / np.linalg.norm(v)
            fd = (subsampled_gradient(prob, S, x + h * v) - subsampled_gradient(prob, S, x - h * v)) / (2 * h)
            assert np.linalg.norm(fd - hv) / max(1.0, np.linalg.norm(hv)) <= 1e-5

    def test_sparse_and_dense_agree(self, small_logistic, rng):
        data = small_logistic.data
        sparse = make_logistic(Dataset(sp.csr_matrix(data.features), data.labels), lam=0.05)
        x, v = rng.standard_normal(10), rng.standard_normal(10)
        S = [0, 2, 4, 6]
        np.testing.assert_allclose(sparse.hessvec(x, v, S), small_logistic.hessvec(x, v, S), rtol=1e-13)
        np.testing.assert_allclose(sparse.gradient(x, S), small_logistic.gradient(x, S), rtol=1e-13)
        assert sparse.value(x, S) == pytest.approx(small_logistic.value(x, S), rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), alpha=st.floats(-3, 3), beta=st.floats(-3, 3))
def test_hessvec_linear_and_symmetric(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((15, 6))
    b = np.where(rng.uniform(size=15) < 0.5, -1.0, 1.0)
    prob = make_logistic(Dataset(A, b), lam=0.01)
    x, u, v = (rng.standard_normal(6) for _ in range(3))
    S = rng.choice(15, size=6, replace=False)
    H = lambda w: prob.hessvec(x, w, S)
    np.testing.assert_allclose(H(alpha * u + beta * v), alpha * H(u) + beta * H(v), atol=1e-12)
    assert u @ H(v) == pytest.approx(v @ H(u), abs=1e-12)
    # every component Hessian dominates the regularizer
    for i in range(15):
        assert v @ prob.hessvec_i(i, x, v) >= 2 * prob.lam * (v @ v) * (1 - 1e-12)


class TestMakeLogistic:
    def test_default_lambda_is_one_over_N(self, rng):
        data = Dataset(rng.standard_normal((40, 3)), np.ones(40))
        assert make_logistic(data).lam == pytest.approx(1 / 40)

    def test_scalar_reduction(self):
        lam = 0.1
        prob = make_logistic(Dataset(np.array([[1.0]]), np.array([1.0])), lam=lam)
        for t in (-30.0, -2.0, 0.0, 1.5, 40.0):
            x = np.array([t])
            assert prob.value(x) == pytest.approx(math.log1p(math.exp(-t)) + lam * t * t, rel=1e-14)

    def test_overflow_safe(self):
        prob = make_logistic(Dataset(np.array([[1.0]]), np.array([-1.0])), lam=0.1)
        x = np.array([1000.0])
        assert prob.value(x) == pytest.approx(1000.0 + 0.1 * 1e6, rel=1e-14)
        assert np.all(np.isfinite(prob.gradient(x)))

    def test_curvature_bounds(self, small_logistic):
        assert small_logistic.lambda_1 == pytest.approx(2 * small_logistic.lam)
        A = small_logistic.data.features
        H = small_logistic.hessian_matrix(np.zeros(10))
        assert np.linalg.eigvalsh(H).max() <= small_logistic.lambda_n + 1e-12
        assert small_logistic.lambda_n == pytest.approx((A * A).sum(1).max() / 4 + 2 * small_logistic.lam)

    def test_invalid_labels(self):
        with pytest.raises(ValueError):
            Dataset(np.eye(2), np.array([1.0, 0.0]))

    def test_invalid_lambda(self, small_logistic):
        with pytest.raises(ValueError):
            make_logistic(small_logistic.data, lam=0.0)


class TestMakeQuadratic:
    def test_identity_case(self, rng):
        x_star = rng.standard_normal(4)
        q = make_quadratic(QuadraticSpec(n=4, N=3, lambda_1=1, lambda_n=1, perturbation=0,
                                         x_star=x_star, shift_scale=0.0))
        x = rng.standard_normal(4)
        for i in range(3):
            assert q.value_i(i, x) == pytest.approx(0.5 * np.sum((x - x_star) ** 2), rel=1e-13)

    def test_spectrum_in_bounds(self):
        q = make_quadratic(QuadraticSpec(n=12, N=40, lambda_1=0.3, lambda_n=1.7, seed=5))
        H = q.hessian_matrix()
        dense = sum((q.Q * d) @ q.Q.T for d in q.curvatures) / q.N
        np.testing.assert_allclose(H, dense, atol=1e-12)
        ev = np.linalg.eigvalsh(dense)
        assert ev.min() >= 0.3 - 1e-12 and ev.max() <= 1.7 + 1e-12
        for d in q.curvatures[:5]:
            ev_i = np.linalg.eigvalsh((q.Q * d) @ q.Q.T)
            assert ev_i.min() >= 0.3 - 1e-12 and ev_i.max() <= 1.7 + 1e-12

    def test_gradient_zero_at_minimizer(self):
        q = make_quadratic(QuadraticSpec(n=10, N=30, seed=1))
        for S in (None, [0], [3, 4, 5]):
            assert np.linalg.norm(q.gradient(q.x_star, S)) <= 1e-12

    @pytest.mark.parametrize("l1,ln", [(0.0, 1.0), (-1.0, 1.0), (2.0, 1.0)])
    def test_invalid_spectrum(self, l1, ln):
        with pytest.raises(ValueError):
            make_quadratic(QuadraticSpec(n=3, N=3, lambda_1=l1, lambda_n=ln))

    def test_semidefinite_components(self):
        q = make_semidefinite_quadratic(6, 200, density=0.5, seed=2)
        assert np.any(q.curvatures == 0)
        ev = np.linalg.eigvalsh(q.hessian_matrix())
        assert ev.min() == pytest.approx(q.full_lambda_1, rel=1e-10)
        assert q.full_lambda_1 > 0


class TestTestingError:
    def test_origin(self, rng):
        data = Dataset(rng.standard_normal((7, 3)), np.ones(7))
        assert held_out_error(np.zeros(3), data) == pytest.approx(math.log(2))

    def test_brute_force(self, rng):
        A = rng.standard_normal((5, 4))
        b = np.array([1.0, -1.0, -1.0, 1.0, 1.0])
        x = rng.standard_normal(4)
        brute = sum(math.log(1 + math.exp(-b[i] * A[i] @ x)) for i in range(5)) / 5
        assert held_out_error(x, Dataset(A, b)) == pytest.approx(brute, rel=1e-13)

    def test_separable_limit(self):
        A = np.array([[1.0, 0.0], [-1.0, 0.5], [2.0, 1.0]])
        b = np.array([1.0, -1.0, 1.0])
        w = np.array([1.0, 0.0])
        errs = [held_out_error(s * w, Dataset(A, b)) for s in (1, 10, 100)]
        assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-40

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            held_out_error(np.zeros(2), Dataset(rng.standard_normal((3, 4)), np.ones(3)))
