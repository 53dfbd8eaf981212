"""Nonmonotone Armijo backtracking with a summable slack sequence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LineSearchFailure

__all__ = ["LineSearchResult", "NuSchedule", "backtrack", "nu_k", "armijo_holds"]


@dataclass(frozen=True)
class NuSchedule:
    """Slack added to the Armijo test.

    ``power``: ``max(1, f0) / k**exponent`` (summable for exponent > 1).
    ``zero``: plain Armijo.
    """

    variant: str = "power"
    exponent: float = 1.1

    def __post_init__(self):
        if self.variant not in ("power", "zero"):
            raise ConfigError(f"unknown nu schedule {self.variant!r}")
        if self.variant == "power" and not self.exponent > 1:
            raise ConfigError("nu exponent must exceed 1 for summability")


def nu_k(schedule, f0, k):
    if k < 1:
        raise ValueError("nu_k is defined for k >= 1")
    if isinstance(schedule, str):
        schedule = NuSchedule(schedule)
    if schedule.variant == "zero":
        return 0.0
    return max(1.0, f0) / k**schedule.exponent


@dataclass
class LineSearchResult:
    t: float
    backtracks: int
    f_trial: float

    @property
    def evaluations(self):
        return self.backtracks + 1


def armijo_holds(f_trial, fx, t, slope, c, nu):
    return f_trial <= fx + c * t * slope + nu


def backtrack(f_sample, x, s, g, c=1e-4, nu=0.0, max_backtracks=60, fx=None):
    """Find the smallest j >= 0 such that ``t = 2**-j`` passes

    ``f(x + t s) <= f(x) + c t s'g + nu``.

    ``fx`` may be passed to reuse an already computed ``f(x)``. Raises
    :class:`LineSearchFailure` after ``max_backtracks`` halvings.
    """
    if fx is None:
        fx = f_sample(x)
    slope = float(s @ g)
    t = 1.0
    f_trial = np.nan
    for j in range(max_backtracks + 1):
        f_trial = f_sample(x + t * s)
        if np.isfinite(f_trial) and armijo_holds(f_trial, fx, t, slope, c, nu):
            return LineSearchResult(t, j, float(f_trial))
        t *= 0.5
    raise LineSearchFailure(
        f"no acceptable step after {max_backtracks} backtracks (slope {slope:.3e})",
        t=2.0 * t, f_trial=f_trial, backtracks=max_backtracks,
    )
