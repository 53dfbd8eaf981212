import numpy as np
import pytest

from subnewton.errors import ConfigError, LineSearchFailure
from subnewton.linesearch import NuSchedule, armijo_holds, backtrack, nu_k
from subnewton.problem import QuadraticSpec, make_quadratic
from subnewton.solver import SolverConfig, solve


def half_sq(x):
    return 0.5 * float(x @ x)


def scan_oracle(f, x, s, g, c, nu, jmax=10):
    fx = f(x)
    for j in range(jmax + 1):
        t = 2.0**-j
        if f(x + t * s) <= fx + c * t * (s @ g) + nu:
            return j
    return None


class TestNu:
    def test_examples(self):
        assert nu_k(NuSchedule(), 0.5, 1) == 1.0
        assert nu_k(NuSchedule(), 10.0, 2) == pytest.approx(4.665, abs=5e-4)
        assert nu_k(NuSchedule(), 10.0, 2) == pytest.approx(10 / 2**1.1, rel=1e-15)
        assert all(nu_k("zero", 100.0, k) == 0.0 for k in range(1, 20))

    def test_summable_partial_sums(self):
        from scipy.special import zeta

        K = 100_000
        partial = sum(nu_k("power", 1.0, k) for k in range(1, K + 1))
        tail = 10 * (K + 0.5) ** -0.1  # integral of x^-1.1 beyond K
        assert partial < zeta(1.1)
        assert partial + tail == pytest.approx(zeta(1.1), rel=1e-3)

    def test_errors(self):
        with pytest.raises(ValueError):
            nu_k("power", 1.0, 0)
        with pytest.raises(ConfigError):
            NuSchedule("power", exponent=1.0)


class TestBacktrack:
    def test_newton_step_accepted(self):
        e1 = np.array([1.0, 0.0])
        res = backtrack(half_sq, e1, -e1, e1, c=1e-4, nu=0.0)
        assert res.t == 1.0 and res.backtracks == 0 and res.f_trial == 0.0
        assert res.evaluations == 1

    def test_overshoot_matches_scan(self):
        e1 = np.array([1.0, 0.0])
        s = -3 * e1
        res = backtrack(half_sq, e1, s, e1, c=1e-4, nu=0.0)
        assert res.backtracks == scan_oracle(half_sq, e1, s, e1, 1e-4, 0.0) == 1
        assert res.t == 0.5
        assert res.f_trial == pytest.approx(0.125)

    def test_random_against_scan(self, rng):
        A = rng.standard_normal((6, 6))
        H = A @ A.T + 0.1 * np.eye(6)
        f = lambda x: 0.5 * x @ H @ x
        for _ in range(50):
            x = rng.standard_normal(6)
            g = H @ x
            s = -rng.uniform(0.1, 20) * g
            nu = float(rng.choice([0.0, 0.01]))
            res = backtrack(f, x, s, g, c=1e-4, nu=nu)
            assert res.backtracks == scan_oracle(f, x, s, g, 1e-4, nu, jmax=60)
            assert res.t == 2.0**-res.backtracks
            assert armijo_holds(f(x + res.t * s), f(x), res.t, s @ g, 1e-4, nu)

    def test_slack_lets_uphill_step_through(self):
        e1 = np.array([1.0])
        res = backtrack(half_sq, e1, 2 * e1, e1, c=1e-4, nu=5.0)
        assert res.t == 1.0

    def test_failure_carries_trial_data(self):
        e1 = np.array([1.0])
        with pytest.raises(LineSearchFailure) as exc:
            backtrack(half_sq, e1, e1, e1, c=1e-4, nu=0.0, max_backtracks=5)
        assert exc.value.backtracks == 5
        assert exc.value.t == 2.0**-5
        assert np.isfinite(exc.value.f_trial)

    def test_fx_reused(self):
        calls = []

        def f(x):
            calls.append(1)
            return half_sq(x)

        e1 = np.array([1.0])
        backtrack(f, e1, -e1, e1, fx=0.5)
        assert len(calls) == 1


def test_step_floor_on_quadratics():
    c = 1e-4
    for seed in range(10):
        spec = QuadraticSpec(n=15, N=60, lambda_1=0.1, lambda_n=2.0, seed=seed)
        q = make_quadratic(spec)
        cfg = SolverConfig(method="GIN", forcing="fixed", eta=0.5, hessian_rule="fixed-fraction",
                           hessian_fraction=0.1, nu="zero", c=c, tol=1e-10, max_iters=40, seed=seed)
        rep = solve(q, np.full(15, 3.0), cfg)
        ts = [r.t for r in rep.trace if r.t is not None]
        assert ts and min(ts) >= (1 - c) * spec.lambda_1 / spec.lambda_n - 1e-12
