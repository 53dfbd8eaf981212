"""Matrix-free conjugate gradients started from the zero vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

__all__ = ["CgOutcome", "cg_solve", "cg_solve_semidefinite"]

FORCING_MET = "forcing-term-met"
ITERATION_CAP = "iteration-cap"
BREAKDOWN = "curvature-breakdown"

# true residual is recomputed this often to bound drift of the recurrence
RESIDUAL_REFRESH = 50


@dataclass
class CgOutcome:
    step: np.ndarray
    iterations: int
    relative_residual: float
    reason: str


def _cg(hessvec, rhs, eta, max_iters, curvature_floor):
    b = np.asarray(rhs, dtype=float)
    bnorm = float(np.linalg.norm(b))
    if not np.isfinite(bnorm):
        raise NumericalFailure("non-finite right-hand side")
    if bnorm == 0.0:
        raise ValueError("rhs is zero; nothing to solve")
    if max_iters is None:
        max_iters = b.size

    s = np.zeros_like(b)
    r = b.copy()  # r = b - H s
    p = r.copy()
    rr = float(r @ r)
    tol = eta * bnorm
    j = 0
    while j < max_iters:
        if np.sqrt(rr) <= tol:
            return CgOutcome(s, j, np.sqrt(rr) / bnorm, FORCING_MET)
        Hp = hessvec(p)
        pHp = float(p @ Hp)
        if not np.isfinite(pHp):
            raise NumericalFailure(f"non-finite curvature at CG iteration {j + 1}")
        if curvature_floor is not None:
            if pHp <= curvature_floor * float(p @ p):
                return CgOutcome(s, j, np.sqrt(rr) / bnorm, BREAKDOWN)
        elif pHp <= 0.0:
            raise NumericalFailure(f"operator not positive definite (p'Hp = {pHp:.3e})")
        a = rr / pHp
        s = s + a * p
        j += 1
        if j % RESIDUAL_REFRESH == 0:
            r = b - hessvec(s)
        else:
            r = r - a * Hp
        rr_new = float(r @ r)
        if not np.isfinite(rr_new):
            raise NumericalFailure(f"non-finite residual at CG iteration {j}")
        p = r + (rr_new / rr) * p
        rr = rr_new
    reason = FORCING_MET if np.sqrt(rr) <= tol else ITERATION_CAP
    return CgOutcome(s, j, np.sqrt(rr) / bnorm, reason)


def cg_solve(hessvec, rhs, eta, max_iters=None):
    """Solve ``H s = rhs`` until ``||H s - rhs|| <= eta ||rhs||``.

    Parameters
    ----------
    hessvec : callable
        ``v -> H v`` for a symmetric positive definite ``H``.
    rhs : ndarray
        Right-hand side, typically the negative gradient. Must be nonzero.
    eta : float
        Relative residual tolerance (forcing term).
    max_iters : int, optional
        Iteration cap; defaults to the dimension.

    Returns
    -------
    CgOutcome
        The last iterate, the number of iterations, the relative residual of
        the (recursive) residual, and why the loop stopped.
    """
    return _cg(hessvec, rhs, eta, max_iters, None)


def cg_solve_semidefinite(hessvec, rhs, eta, max_iters=None, curvature_floor=1e-12):
    """CG variant for possibly singular positive semidefinite operators.

    When a search direction ``p`` has ``p'Hp <= curvature_floor * ||p||^2`` the
    loop stops and returns the iterate built before that direction. If this
    happens on the first direction the returned step is zero and the caller
    must supply a fallback.
    """
    return _cg(hessvec, rhs, eta, max_iters, float(curvature_floor))
