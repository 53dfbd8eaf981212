"""Finite-sum objectives ``f(x) = (1/N) sum_i f_i(x)`` with subsampled oracles.

Two concrete families are provided:

* L2-regularized logistic regression over a labelled dataset (dense or CSR
  features), ``f_i(x) = log(1 + exp(-b_i a_i^T x)) + lam * ||x||^2``.
* Synthetic strongly convex quadratics sharing a planted minimizer, with
  component Hessians ``Q diag(d_i) Q^T`` whose spectra are known exactly.

All oracles accept a ``sample`` argument: ``None`` for the full index set or
an integer index array. Hessians are only ever applied to vectors, except in
the explicit ``hessian_matrix`` helpers used by small-n test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

__all__ = [
    "Dataset",
    "FiniteSumProblem",
    "LogisticProblem",
    "QuadraticProblem",
    "QuadraticSpec",
    "make_logistic",
    "make_quadratic",
    "make_semidefinite_quadratic",
    "subsampled_value",
    "subsampled_gradient",
    "subsampled_hessvec",
    "testing_error",
]


def as_sample(sample, N):
    """Validate an index sample. Returns ``None`` for the full set."""
    if sample is None:
        return None
    idx = np.asarray(sample)
    if idx.ndim != 1:
        idx = idx.ravel()
    if idx.size == 0:
        raise ValueError("sample must be nonempty")
    if not np.issubdtype(idx.dtype, np.integer):
        raise ValueError("sample indices must be integers")
    if idx.min() < 0 or idx.max() >= N:
        raise ValueError(f"sample indices must lie in [0, {N})")
    return idx


def sample_size(sample, N):
    return N if sample is None else len(sample)


@dataclass
class Dataset:
    """Labelled binary classification data.

    ``features`` is an ``(N, n)`` dense array or scipy CSR matrix, ``labels``
    a length-N array of -1.0/+1.0.
    """

    features: np.ndarray | sp.csr_matrix
    labels: np.ndarray

    def __post_init__(self):
        if sp.issparse(self.features):
            self.features = sp.csr_matrix(self.features, dtype=float)
        else:
            self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=float).ravel()
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )
        if not np.all(np.abs(self.labels) == 1.0):
            raise ValueError("labels must be exactly -1 or +1")

    @property
    def N(self):
        return self.features.shape[0]

    @property
    def n(self):
        return self.features.shape[1]

    def subset(self, idx):
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx])


class FiniteSumProblem:
    """Base class for ``f(x) = (1/N) sum_i f_i(x)``.

    Subclasses implement ``component_values``, ``gradient``, and
    ``hessian_operator``; everything else is derived.

    Attributes
    ----------
    n : int
        Dimension of ``x``.
    N : int
        Number of components.
    lambda_1, lambda_n : float or None
        Curvature bounds valid for every component Hessian, when known.
    """

    n: int
    N: int
    lambda_1: float | None = None
    lambda_n: float | None = None

    def component_values(self, x, sample=None):
        raise NotImplementedError

    def value(self, x, sample=None):
        sample = as_sample(sample, self.N)
        return float(np.mean(self.component_values(x, sample)))

    def gradient(self, x, sample=None):
        raise NotImplementedError

    def hessian_operator(self, x, sample=None):
        """Return ``v -> (1/|S|) sum_{i in S} hess f_i(x) v`` for fixed ``x``, ``S``."""
        raise NotImplementedError

    def hessvec(self, x, v, sample=None):
        return self.hessian_operator(x, sample)(v)

    # single-component oracles, mostly for tests and brute-force checks
    def value_i(self, i, x):
        return self.value(x, [i])

    def gradient_i(self, i, x):
        return self.gradient(x, [i])

    def hessvec_i(self, i, x, v):
        return self.hessvec(x, v, [i])

    def hessian_matrix(self, x, sample=None):
        """Dense Hessian by applying the operator to the identity. Small n only."""
        op = self.hessian_operator(x, sample)
        H = np.column_stack([op(e) for e in np.eye(self.n)])
        return 0.5 * (H + H.T)


def subsampled_value(problem, sample, x):
    """Mean of the component values over ``sample``."""
    return problem.value(x, as_sample(sample, problem.N))


def subsampled_gradient(problem, sample, x):
    """Mean of the component gradients over ``sample``."""
    return problem.gradient(x, as_sample(sample, problem.N))


def subsampled_hessvec(problem, sample, x, v):
    """Mean of component Hessian-vector products over ``sample`` (matrix-free)."""
    return problem.hessvec(x, v, as_sample(sample, problem.N))


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------


def _log1p_exp_neg(t):
    """Stable ``log(1 + exp(-t))``."""
    return np.logaddexp(0.0, -t)


class LogisticProblem(FiniteSumProblem):
    """L2-regularized logistic loss, one component per sample."""

    def __init__(self, dataset: Dataset, lam: float):
        if not lam > 0:
            raise ValueError("lambda must be positive")
        self.data = dataset
        self.lam = float(lam)
        self.N = dataset.N
        self.n = dataset.n
        A = dataset.features
        if sp.issparse(A):
            row_sq = np.asarray(A.multiply(A).sum(axis=1)).ravel()
        else:
            row_sq = np.einsum("ij,ij->i", A, A)
        self.lambda_1 = 2.0 * self.lam
        # sigma(t) sigma(-t) <= 1/4, so each data term is bounded by ||a_i||^2 / 4
        self.lambda_n = float(row_sq.max()) / 4.0 + 2.0 * self.lam

    def _rows(self, sample):
        if sample is None:
            return self.data.features, self.data.labels
        return self.data.features[sample], self.data.labels[sample]

    def _margins(self, x, sample):
        A, b = self._rows(sample)
        return A, b, b * (A @ x)

    def component_values(self, x, sample=None):
        _, _, t = self._margins(x, sample)
        return _log1p_exp_neg(t) + self.lam * float(x @ x)

    def gradient(self, x, sample=None):
        sample = as_sample(sample, self.N)
        A, b, t = self._margins(x, sample)
        # (1 - c)/c = -exp(-t)/(1 + exp(-t)) = -sigma(-t)
        coef = -expit(-t) * b
        return A.T @ coef / len(b) + 2.0 * self.lam * x

    def hessian_operator(self, x, sample=None):
        sample = as_sample(sample, self.N)
        A, b, t = self._margins(x, sample)
        # -(1 - c)/c^2 = sigma(t) sigma(-t) >= 0
        w = expit(t) * expit(-t) / len(b)
        lam2 = 2.0 * self.lam

        def apply(v):
            return A.T @ (w * (A @ v)) + lam2 * v

        return apply


def make_logistic(dataset: Dataset, lam: float | None = None) -> LogisticProblem:
    """Build the logistic objective; ``lam`` defaults to ``1/N``."""
    if lam is None:
        lam = 1.0 / dataset.N
    return LogisticProblem(dataset, lam)


def testing_error(x, test_set: Dataset) -> float:
    """Mean unregularized logistic loss of ``x`` on a held-out set."""
    if test_set.N == 0:
        raise ValueError("empty test set")
    if test_set.n != len(x):
        raise ValueError(f"dimension mismatch: {test_set.n} vs {len(x)}")
    t = test_set.labels * (test_set.features @ x)
    return float(np.mean(_log1p_exp_neg(t)))


# ---------------------------------------------------------------------------
# quadratics with known spectra
# ---------------------------------------------------------------------------


@dataclass
class QuadraticSpec:
    """Recipe for a strongly convex quadratic finite sum.

    Each component is ``f_i(x) = 0.5 (x - x*)^T Q diag(d_i) Q^T (x - x*) + shift_i``
    with ``d_i`` in ``[lambda_1, lambda_n]``. ``perturbation`` in [0, 1] blends
    a shared spectrum (0) with independent uniform draws per component (1).
    """

    n: int
    N: int
    lambda_1: float = 0.1
    lambda_n: float = 1.0
    perturbation: float = 0.5
    x_star: np.ndarray | None = None
    seed: int = 0
    shift_scale: float = 1.0


class QuadraticProblem(FiniteSumProblem):
    def __init__(self, Q, curvatures, x_star, shifts, lambda_1, lambda_n):
        self.Q = np.asarray(Q, dtype=float)
        self.curvatures = np.asarray(curvatures, dtype=float)  # (N, n) eigenvalues
        self.x_star = np.asarray(x_star, dtype=float)
        self.shifts = np.asarray(shifts, dtype=float)
        self.N, self.n = self.curvatures.shape
        self.lambda_1 = float(lambda_1)
        self.lambda_n = float(lambda_n)
        self.f_star = float(np.mean(self.shifts))
        # exact extreme eigenvalues of the full-sample Hessian
        mean_d = self.curvatures.mean(axis=0)
        self.full_lambda_1 = float(mean_d.min())
        self.full_lambda_n = float(mean_d.max())

    def _coords(self, x):
        return self.Q.T @ (np.asarray(x, dtype=float) - self.x_star)

    def _mean_curvature(self, sample):
        if sample is None:
            return self.curvatures.mean(axis=0)
        return self.curvatures[sample].mean(axis=0)

    def component_values(self, x, sample=None):
        y = self._coords(x)
        d = self.curvatures if sample is None else self.curvatures[sample]
        s = self.shifts if sample is None else self.shifts[sample]
        return 0.5 * (d @ (y * y)) + s

    def gradient(self, x, sample=None):
        sample = as_sample(sample, self.N)
        return self.Q @ (self._mean_curvature(sample) * self._coords(x))

    def hessian_operator(self, x, sample=None):
        sample = as_sample(sample, self.N)
        d = self._mean_curvature(sample)
        Q = self.Q

        def apply(v):
            return Q @ (d * (Q.T @ v))

        return apply

    def hessian_matrix(self, x=None, sample=None):
        sample = as_sample(sample, self.N)
        d = self._mean_curvature(sample)
        return (self.Q * d) @ self.Q.T


def _random_orthogonal(n, rng):
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def make_quadratic(spec: QuadraticSpec) -> QuadraticProblem:
    """Generate a quadratic finite sum with exact curvature bounds and minimizer."""
    if not (0 < spec.lambda_1 <= spec.lambda_n):
        raise ValueError("need 0 < lambda_1 <= lambda_n")
    if not 0.0 <= spec.perturbation <= 1.0:
        raise ValueError("perturbation must lie in [0, 1]")
    rng = np.random.default_rng(spec.seed)
    n, N = spec.n, spec.N
    Q = _random_orthogonal(n, rng)
    if n == 1:
        base = np.array([spec.lambda_1])
    else:
        base = np.linspace(spec.lambda_1, spec.lambda_n, n)
    draws = rng.uniform(spec.lambda_1, spec.lambda_n, size=(N, n))
    curv = (1.0 - spec.perturbation) * base + spec.perturbation * draws
    np.clip(curv, spec.lambda_1, spec.lambda_n, out=curv)
    x_star = spec.x_star
    if x_star is None:
        x_star = rng.standard_normal(n)
    x_star = np.asarray(x_star, dtype=float)
    if x_star.shape != (n,):
        raise ValueError(f"x_star must have shape ({n},)")
    shifts = spec.shift_scale * rng.standard_normal(N)
    return QuadraticProblem(Q, curv, x_star, shifts, spec.lambda_1, spec.lambda_n)


def make_semidefinite_quadratic(n, N, lambda_n=1.0, density=0.5, seed=0):
    """Quadratic whose components are only positive semidefinite.

    Every component eigenvalue is either 0 or ``lambda_n`` (kept with
    probability ``density``), so individual Hessians are singular while the
    full-sample Hessian is positive definite with high probability. The
    component lower bound ``lambda_1`` is 0; ``full_lambda_1`` holds the
    exact smallest eigenvalue of the full Hessian.
    """
    if not (lambda_n > 0 and 0 < density <= 1):
        raise ValueError("need lambda_n > 0 and density in (0, 1]")
    rng = np.random.default_rng(seed)
    Q = _random_orthogonal(n, rng)
    curv = lambda_n * (rng.uniform(size=(N, n)) < density)
    x_star = rng.standard_normal(n)
    shifts = rng.standard_normal(N)
    prob = QuadraticProblem(Q, curv, x_star, shifts, 0.0, lambda_n)
    if prob.full_lambda_1 <= 0:
        raise ValueError("full Hessian is singular; increase N or density")
    return prob
