import numpy as np
import pytest

from subnewton.problem import Dataset, QuadraticSpec, make_logistic, make_quadratic


def central_fd_gradient(f, x, h=None):
    if h is None:
        h = 1e-6 * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_logistic(rng):
    A = rng.standard_normal((20, 10))
    b = np.where(rng.uniform(size=20) < 0.5, -1.0, 1.0)
    return make_logistic(Dataset(A, b), lam=0.05)


@pytest.fixture
def small_quadratic():
    return make_quadratic(QuadraticSpec(n=8, N=10, lambda_1=0.2, lambda_n=2.0, seed=3))
