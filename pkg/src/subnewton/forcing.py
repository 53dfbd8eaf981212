"""Forcing-term policies for the inner CG tolerance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["AdaptiveForcing", "FixedForcing", "ForcingState", "fixed_eta", "model_value", "next_eta"]

_TINY = float(np.finfo(float).eps)


def model_value(f_prev, g_prev, hessvec_prev, s):
    """Quadratic model ``f + g's + 0.5 s'Hs`` built at the previous iterate."""
    s = np.asarray(s, dtype=float)
    return float(f_prev + g_prev @ s + 0.5 * (s @ hessvec_prev(s)))


@dataclass
class ForcingState:
    """What the agreement rule carries from iteration k-1 to k."""

    model_prev: float | None = None
    gnorm_prev: float | None = None
    cap: float = 0.1
    floor: float = 1e-3
    eta0: float = 0.1
    scale: float = 1.0


def next_eta(state: ForcingState, f_now):
    """``clip(|f_now - m_prev| / (scale * ||g_prev||), floor, cap)``; ``eta0`` on the first call."""
    if state.model_prev is None or state.gnorm_prev is None:
        return state.eta0
    if state.gnorm_prev == 0:
        return max(state.floor, _TINY)
    ratio = abs(f_now - state.model_prev) / (state.scale * state.gnorm_prev)
    eta = min(state.cap, max(ratio, state.floor))
    # keep eta strictly positive even with floor = 0
    return max(eta, _TINY)


class FixedForcing:
    """Constant forcing term."""

    adaptive = False

    def __init__(self, value):
        if not 0 < value < 1:
            raise ConfigError("forcing term must lie in (0, 1)")
        self.value = float(value)

    def eta(self, f_now):
        return self.value

    def update(self, f_prev, g_prev, hessvec_prev, step):
        pass


def fixed_eta(value):
    return FixedForcing(value)


class AdaptiveForcing:
    """Agreement-based forcing term, clipped to ``[floor, cap]``.

    ``floor=0`` and ``cap=eta_bar`` gives the unclipped rule. ``scale``
    multiplies the previous gradient norm in the denominator.
    """

    adaptive = True

    def __init__(self, cap=0.1, floor=1e-3, eta0=0.1, scale=1.0):
        if not 0 < cap < 1:
            raise ConfigError("cap must lie in (0, 1)")
        if not 0 <= floor <= cap:
            raise ConfigError("floor must lie in [0, cap]")
        if not 0 < eta0 < 1:
            raise ConfigError("eta0 must lie in (0, 1)")
        if not scale > 0:
            raise ConfigError("scale must be positive")
        self.state = ForcingState(cap=cap, floor=floor, eta0=eta0, scale=scale)

    def eta(self, f_now):
        return next_eta(self.state, f_now)

    def update(self, f_prev, g_prev, hessvec_prev, step):
        """Store the model value at the full step taken from the previous iterate."""
        self.state.model_prev = model_value(f_prev, g_prev, hessvec_prev, step)
        self.state.gnorm_prev = float(np.linalg.norm(g_prev))
