"""Monte Carlo estimates of mean-square errors over seeded replications."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..solver import solve
from ..sampling import spawn_rngs

__all__ = ["MsTable", "ms_study"]


@dataclass
class MsTable:
    """Squared errors ``||x^k - x*||^2`` for M replications (rows) by iteration.

    Entries past a replication's termination are NaN.
    """

    sq_errors: np.ndarray
    confidence: float = 0.95

    @property
    def M(self):
        return self.sq_errors.shape[0]

    def alive(self):
        """Number of iterations for which every replication has data."""
        ok = np.all(np.isfinite(self.sq_errors), axis=0)
        return int(np.argmin(ok)) if not ok.all() else len(ok)

    def mean(self):
        return np.nanmean(self.sq_errors, axis=0)

    def half_width(self):
        """Two-sided normal-approximation half width of the mean."""
        z = stats.norm.ppf(0.5 + self.confidence / 2)
        e = self.sq_errors
        cnt = np.sum(np.isfinite(e), axis=0)
        sd = np.nanstd(e, axis=0, ddof=1) if e.shape[0] > 1 else np.zeros(e.shape[1])
        return z * sd / np.sqrt(cnt)

    def contraction(self):
        """``mean(e_{k+1}) / mean(e_k)``."""
        m = self.mean()
        return m[1:] / m[:-1]

    def ratios(self):
        """Per-replication ratios ``e_{k+1} / e_k``, shape (M, K - 1)."""
        e = self.sq_errors
        with np.errstate(divide="ignore", invalid="ignore"):
            return e[:, 1:] / e[:, :-1]

    def ratio_upper(self, ks):
        """One-sided upper confidence bound on the mean ratio pooled over iterations ``ks``.

        Each replication contributes the average of its ratios over ``ks``, so
        replications stay the independent unit.
        """
        r = self.ratios()[:, ks].mean(axis=1)
        z = stats.norm.ppf(self.confidence)
        return float(r.mean() + z * r.std(ddof=1) / np.sqrt(len(r))), float(r.mean())

    def rows(self):
        m, h = self.mean(), self.half_width()
        c = np.append(self.contraction(), np.nan)
        cnt = np.sum(np.isfinite(self.sq_errors), axis=0)
        return [(k, int(cnt[k]), m[k], m[k] - h[k], m[k] + h[k], c[k]) for k in range(len(m))]

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "count", "mean_sq_err", "ci_low", "ci_high", "contraction"])
            for row in self.rows():
                w.writerow([row[0], row[1]] + [repr(float(v)) for v in row[2:]])


def ms_study(problem, config, M, seed=0, x0=None, x_star=None, confidence=0.95):
    """Run ``M`` replications of ``config`` with independent sampling streams.

    ``x_star`` defaults to ``problem.x_star``. All replications start from the
    same ``x0`` (zeros by default); only the Hessian subsamples differ.
    """
    if x_star is None:
        x_star = problem.x_star
    if x0 is None:
        x0 = np.zeros(problem.n)
    runs = []
    for rng in spawn_rngs(seed, M):
        xs = []
        rep = solve(problem, x0, config, rng=rng, on_step=lambda info: xs.append(info.x))
        xs.append(rep.x)
        runs.append([float(np.sum((x - x_star) ** 2)) for x in xs])
    K = max(len(r) for r in runs)
    E = np.full((M, K), np.nan)
    for i, r in enumerate(runs):
        E[i, : len(r)] = r
    return MsTable(E, confidence)
