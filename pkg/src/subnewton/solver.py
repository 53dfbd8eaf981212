"""Outer iterations of the subsampled inexact Newton methods.

``GIN``
    Hessian sample chosen directly by a rule (full, fixed fraction, or the
    CG-feedback rule).
``GIN-R``
    Hessian sample sized by the matrix Bernstein bound at accuracy
    ``gamma_k = C max(eta_k, ||g_k||)`` and drawn uniformly from N_k.
``GINR-M``
    Hessian sample sized by the matrix Chernoff bound for semidefinite
    components; CG stops on vanishing curvature.

Every method solves ``H_Dk s = -g_Nk`` with CG from zero to relative residual
``eta_k`` and takes a nonmonotone Armijo step.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import cg as cgmod
from .errors import ConfigError, LineSearchFailure, NumericalFailure
from .forcing import AdaptiveForcing, FixedForcing
from .linesearch import NuSchedule, backtrack, nu_k
from .sampling import (
    HessianSampleRule,
    NkSchedule,
    adaptive_dk,
    bernstein_size,
    chernoff_size,
    draw_subsample,
    gamma_k,
    make_rng,
    nk_schedule,
)

logger = logging.getLogger(__name__)

__all__ = [
    "IterationRecord",
    "SolveReport",
    "SolverConfig",
    "StepInfo",
    "TRACE_COLUMNS",
    "TraceWriter",
    "fev_cost",
    "reference_minimizer",
    "solve",
    "write_trace_csv",
]

METHODS = ("GIN", "GIN-R", "GINR-M")


@dataclass
class SolverConfig:
    """All solver tunables. Defaults reproduce the full inexact Newton setup."""

    method: str = "GIN"
    # forcing term
    forcing: str = "fixed"
    eta: float = 1e-4
    eta_cap: float = 0.1
    eta_floor: float = 1e-3
    eta0: float = 0.1
    eta_scale: float = 1.0
    # Hessian sample
    hessian_rule: str = "full"
    hessian_fraction: float = 0.3
    C: float = 1.0
    alpha: float = 0.1
    alpha_decay: bool = False
    mu: float = 0.1
    d0_fraction: float = 0.1
    cg_threshold: int = 20
    lambda_1: float | None = None
    lambda_n: float | None = None
    # function/gradient sample
    nk_schedule: str = "full"
    nk_n0: int = 100
    nk_growth: float = 2.0
    # line search
    c: float = 1e-4
    nu: str = "power"
    nu_exponent: float = 1.1
    max_backtracks: int = 60
    superlinear: bool = False
    # stopping and inner solver
    tol: float = 1e-4
    max_iters: int = 50
    cg_max_iters: int | None = None
    curvature_floor: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.forcing not in ("fixed", "adaptive"):
            raise ConfigError(f"unknown forcing policy {self.forcing!r}")
        if not 0 < self.c < 1:
            raise ConfigError("c must lie in (0, 1)")
        if self.superlinear and not self.c < 0.25:
            raise ConfigError("full-step theory requires c < 1/4")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.max_iters < 0:
            raise ConfigError("max_iters must be nonnegative")
        if self.cg_max_iters is not None and self.cg_max_iters < 1:
            raise ConfigError("cg_max_iters must be at least 1")
        if self.curvature_floor < 0:
            raise ConfigError("curvature_floor must be nonnegative")
        if self.method == "GINR-M" and not 0 < self.mu < 1:
            raise ConfigError("mu must lie in (0, 1)")
        # builders raise ConfigError on bad constants
        self.forcing_policy()
        self.hessian_sample_rule()
        NkSchedule(self.nk_schedule, self.nk_n0, self.nk_growth)
        NuSchedule(self.nu, self.nu_exponent)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def forcing_policy(self):
        if self.forcing == "fixed":
            return FixedForcing(self.eta)
        return AdaptiveForcing(cap=self.eta_cap, floor=self.eta_floor, eta0=self.eta0,
                               scale=self.eta_scale)

    def hessian_sample_rule(self):
        variant = {"GIN-R": "bernstein", "GINR-M": "chernoff"}.get(self.method, self.hessian_rule)
        if self.method == "GIN" and variant in ("bernstein", "chernoff"):
            raise ConfigError(f"rule {variant!r} belongs to GIN-R/GINR-M; set method accordingly")
        return HessianSampleRule(
            variant=variant, fraction=self.hessian_fraction, C=self.C, alpha=self.alpha,
            alpha_decay=self.alpha_decay, mu=self.mu, d0_fraction=self.d0_fraction,
            cg_threshold=self.cg_threshold,
        )


TRACE_COLUMNS = ("k", "Nk", "Dk", "eta", "gamma", "f", "gnorm", "cg_iters", "cg_reason",
                 "t", "backtracks", "fev", "err_x", "err_f")


@dataclass
class IterationRecord:
    """State at iterate ``x^k`` and the step taken from it.

    ``fev`` is the cumulative cost, in full function evaluations, spent up to
    and including the evaluation of ``x^k``. Step fields are empty on the
    terminal record.
    """

    k: int
    Nk: int
    Dk: int | None
    eta: float | None
    gamma: float | None
    f: float
    gnorm: float
    cg_iters: int | None
    cg_reason: str
    t: float | None
    backtracks: int | None
    fev: float
    err_x: float | None = None
    err_f: float | None = None
    wall_time: float = 0.0

    def row(self):
        return [_fmt(getattr(self, c)) for c in TRACE_COLUMNS]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class StepInfo:
    """Everything computed at one outer iteration, for callbacks and tests."""

    k: int
    x: np.ndarray
    f: float
    g: np.ndarray
    eta: float
    hess_idx: np.ndarray | None
    func_idx: np.ndarray | None
    step: np.ndarray
    cg: cgmod.CgOutcome
    t: float
    nu: float
    f_trial: float
    fallback: bool


@dataclass
class SolveReport:
    x: np.ndarray
    reason: str
    trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    message: str = ""

    @property
    def iterations(self):
        return self.trace[-1].k if self.trace else 0

    @property
    def fev(self):
        return self.trace[-1].fev if self.trace else 0.0

    def column(self, name):
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.trace], dtype=float)


def fev_cost(N, Dk, cg_iters, function_evals, Nk=None):
    """Cost of one iteration in full function evaluations.

    Each evaluation of ``f_Nk`` costs ``Nk/N``; gradients ride along for free;
    each CG iteration (one Hessian-vector product over D_k) costs ``Dk/N``.
    """
    if N <= 0:
        raise ValueError("N must be positive")
    Nk = N if Nk is None else Nk
    return function_evals * Nk / N + cg_iters * Dk / N


class TraceWriter:
    """Appends trace rows to a CSV file as they are produced."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(TRACE_COLUMNS)
        self._fh.flush()

    def __call__(self, record):
        self._w.writerow(record.row())
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def trace_csv_text(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def write_trace_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(trace_csv_text(records))


def _hessian_size(rule, method, k, eta, gnorm, Nk, N, n, lam1, lamn, prev_cg, D0):
    """Return (target size, gamma) for the Hessian sample at iteration k."""
    v = rule.variant
    if v == "full":
        return Nk, None
    if v == "fixed-fraction":
        return max(1, math.ceil(rule.fraction * N)), None
    if v == "adaptive-feedback":
        if prev_cg is None:
            return D0, None
        return adaptive_dk(eta, gnorm, N, D0, prev_cg, rule.cg_threshold,
                           rule.slow_c, rule.fast_c), None
    if v == "bernstein":
        gamma = gamma_k(rule.C, eta, gnorm)
        return bernstein_size(n, lamn, gamma, rule.alpha_k(k)), gamma
    if v == "chernoff":
        return chernoff_size(n, lam1, lamn, rule.mu, rule.alpha_k(k)), None
    raise ConfigError(f"unknown rule {v!r}")


def solve(problem, x0, config: SolverConfig, rng=None, reference=None, callback=None,
          on_step=None):
    """Run one method from ``x0``.

    Parameters
    ----------
    problem : FiniteSumProblem
    x0 : ndarray
    config : SolverConfig
    rng : numpy Generator or seed, optional
        Defaults to a generator seeded with ``config.seed``.
    reference : tuple (x_star, f_star), optional
        Enables the ``err_x`` and ``err_f`` trace columns; ``f`` there is always
        the full-sample objective.
    callback : callable, optional
        Receives every :class:`IterationRecord` as soon as it is complete.
    on_step : callable, optional
        Receives a :class:`StepInfo` after each accepted step.

    Returns
    -------
    SolveReport
    """
    x = np.array(x0, dtype=float)
    if x.shape != (problem.n,) or not np.all(np.isfinite(x)):
        raise ValueError(f"x0 must be a finite vector of length {problem.n}")
    rng = make_rng(config.seed if rng is None else rng)
    N, n = problem.N, problem.n
    rule = config.hessian_sample_rule()
    schedule = NkSchedule(config.nk_schedule, config.nk_n0, config.nk_growth)
    nu_sched = NuSchedule(config.nu, config.nu_exponent)
    forcing = config.forcing_policy()
    lamn = config.lambda_n if config.lambda_n is not None else problem.lambda_n
    lam1 = config.lambda_1
    if lam1 is None:
        lam1 = getattr(problem, "full_lambda_1", None) or problem.lambda_1
    if rule.variant in ("bernstein", "chernoff") and lamn is None:
        raise ConfigError(f"{config.method} needs an upper curvature bound lambda_n")
    if rule.variant == "chernoff" and lam1 is None:
        raise ConfigError("GINR-M needs a lower curvature bound lambda_1")
    cg_max = config.cg_max_iters or n
    D0 = max(1, math.ceil(rule.d0_fraction * N))
    perm = rng.permutation(N) if schedule.variant != "full" else None

    report = SolveReport(x=x, reason="max-iterations")
    fev = 0.0
    f0 = None
    prev_cg = None
    carried = None  # (Nk, x, f) from the accepted line-search trial
    start = time.perf_counter()

    def emit(rec):
        report.trace.append(rec)
        if callback is not None:
            callback(rec)

    for k in range(config.max_iters + 1):
        Nk = nk_schedule(schedule, k, N)
        Nk = min(Nk, N)
        func_idx = None if Nk >= N else np.sort(perm[:Nk])

        if carried is not None and carried[0] == Nk:
            f = carried[2]
        else:
            f = problem.value(x, func_idx)
            fev += Nk / N
        g = problem.gradient(x, func_idx)
        gnorm = float(np.linalg.norm(g))
        if not (np.isfinite(f) and np.isfinite(gnorm)):
            report.reason = "numerical-failure"
            report.message = f"non-finite f or gradient at iteration {k}"
            break
        if f0 is None:
            f0 = f

        err_x = err_f = None
        if reference is not None:
            x_star, f_star = reference
            err_x = float(np.linalg.norm(x - x_star))
            err_f = problem.value(x) - f_star if f_star is not None else None

        def terminal(reason):
            emit(IterationRecord(k, Nk, None, None, None, f, gnorm, None, "", None, None, fev,
                                 err_x, err_f, time.perf_counter() - start))
            report.reason = reason

        if gnorm <= config.tol:
            terminal("gradient-tolerance")
            if Nk < N:
                report.warnings.append(
                    f"stopped on a sampled gradient (N_k={Nk} < N={N}); the full gradient "
                    "norm may exceed tol by the sampling error")
            break
        if k == config.max_iters:
            terminal("max-iterations")
            break

        eta = forcing.eta(f)
        target, gamma = _hessian_size(rule, config.method, k, eta, gnorm, Nk, N, n, lam1, lamn,
                                      prev_cg, D0)
        population = np.arange(N) if func_idx is None else func_idx
        if target >= Nk:
            hess_idx = func_idx
            Dk = Nk
        else:
            hess_idx = draw_subsample(population, target, rng)
            Dk = len(hess_idx)
        H = problem.hessian_operator(x, hess_idx)

        fallback = False
        try:
            if config.method == "GINR-M":
                out = cgmod.cg_solve_semidefinite(H, -g, eta, cg_max, config.curvature_floor)
                if out.reason == cgmod.BREAKDOWN and not np.any(out.step):
                    # no CG iterate to fall back on: steepest descent keeps the
                    # line search well defined
                    out.step = -g
                    fallback = True
            else:
                out = cgmod.cg_solve(H, -g, eta, cg_max)
        except NumericalFailure as exc:
            terminal("numerical-failure")
            report.message = str(exc)
            break
        s = out.step
        step_cost = out.iterations * Dk / N

        nu = nu_k(nu_sched, f0, k + 1)
        evals = {"count": 0}

        def f_sample(y):
            evals["count"] += 1
            return problem.value(y, func_idx)

        try:
            ls = backtrack(f_sample, x, s, g, config.c, nu, config.max_backtracks, fx=f)
        except LineSearchFailure as exc:
            emit(IterationRecord(k, Nk, Dk, eta, gamma, f, gnorm, out.iterations, out.reason,
                                 None, config.max_backtracks, fev, err_x, err_f,
                                 time.perf_counter() - start))
            report.reason = "line-search-failure"
            report.message = str(exc)
            break
        step_cost += evals["count"] * Nk / N
        forcing.update(f, g, H, s)

        emit(IterationRecord(k, Nk, Dk, eta, gamma, f, gnorm, out.iterations, out.reason,
                             ls.t, ls.backtracks, fev, err_x, err_f,
                             time.perf_counter() - start))
        if on_step is not None:
            on_step(StepInfo(k, x.copy(), f, g, eta, hess_idx, func_idx, s, out, ls.t, nu,
                             ls.f_trial, fallback))
        fev += step_cost
        x = x + ls.t * s
        carried = (Nk, x, ls.f_trial)
        prev_cg = out.iterations

    report.x = x
    for w in report.warnings:
        logger.warning(w)
    return report


def reference_minimizer(problem, x0=None, tol=1e-8, max_iters=200):
    """High-accuracy minimizer by full Newton-CG with plain Armijo steps."""
    if x0 is None:
        x0 = np.zeros(problem.n)
    cfg = SolverConfig(method="GIN", forcing="fixed", eta=1e-12, hessian_rule="full",
                       nu="zero", tol=tol, max_iters=max_iters)
    rep = solve(problem, x0, cfg)
    if rep.reason != "gradient-tolerance":
        raise RuntimeError(f"reference solve did not converge: {rep.reason} {rep.message}")
    return rep.x
