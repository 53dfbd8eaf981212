"""Empirical convergence-rate classification of error sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RateFit", "fit_rates", "loglinear_fit", "ratios_strictly_decreasing"]


@dataclass
class RateFit:
    """One fitted segment ``[start, stop)`` of an error sequence.

    ``rho`` is the geometric factor ``exp(slope)`` and is only set when the
    fit has ``r2 >= 0.9`` on at least four points.
    """

    start: int
    stop: int
    rho: float | None
    r2: float
    classification: str  # "linear", "superlinear-signature" or "stalled"


def loglinear_fit(k, err):
    """Least squares of ``log(err)`` on ``k``; returns (slope, intercept, r2)."""
    k = np.asarray(k, dtype=float)
    y = np.log(np.asarray(err, dtype=float))
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (slope * k + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def ratios_strictly_decreasing(values, count=4):
    """True when the last ``count`` successive ratios ``v[k+1]/v[k]`` strictly decrease."""
    v = np.asarray(values, dtype=float)
    if len(v) < count + 1 or np.any(v[-(count + 1):] <= 0):
        return False
    r = v[-count:] / v[-(count + 1):-1]
    return bool(np.all(np.diff(r) < 0))


def fit_rates(errors, gnorms=None, window=5, r2_min=0.9, stall_tol=1e-8):
    """Classify an error sequence on sliding windows plus a tail check.

    Parameters
    ----------
    errors : sequence of float
        Training errors ``f_k - f*`` (or distances to the minimizer).
        Nonpositive and non-finite entries end the usable prefix.
    gnorms : sequence of float, optional
        Gradient norms used for the superlinear tail test; defaults to
        ``errors``.
    window : int
        Points per sliding fit (at least 4).

    Returns
    -------
    list of RateFit
        Empty when fewer than six usable points are available.
    """
    err = np.asarray(errors, dtype=float)
    bad = np.flatnonzero(~(np.isfinite(err) & (err > 0)))
    if bad.size:
        err = err[: bad[0]]
    if len(err) < 6:
        return []
    window = max(4, int(window))
    k = np.arange(len(err))
    fits = []
    for start in range(0, len(err) - window + 1):
        stop = start + window
        slope, _, r2 = loglinear_fit(k[start:stop], err[start:stop])
        if slope > -stall_tol:
            fits.append(RateFit(start, stop, None, r2, "stalled"))
        else:
            rho = float(np.exp(slope)) if r2 >= r2_min else None
            fits.append(RateFit(start, stop, rho, r2, "linear"))
    tail = err if gnorms is None else np.asarray(gnorms, dtype=float)
    tail = tail[np.isfinite(tail) & (tail > 0)]
    if ratios_strictly_decreasing(tail, 4):
        stop = len(tail)
        slope, _, r2 = loglinear_fit(np.arange(stop - 5, stop), tail[-5:])
        fits.append(RateFit(stop - 5, stop, None, r2, "superlinear-signature"))
    return fits
