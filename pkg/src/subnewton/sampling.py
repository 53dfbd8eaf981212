"""Sample-size rules and index sampling for function/gradient and Hessian subsets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "HessianSampleRule",
    "NkSchedule",
    "SampleState",
    "adaptive_dk",
    "bernstein_size",
    "chernoff_size",
    "draw_subsample",
    "gamma_k",
    "make_rng",
    "nk_schedule",
    "spawn_rngs",
]


def make_rng(seed):
    """Counter-based generator (Philox) seeded from ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed, count):
    """Independent streams for parallel replications."""
    return [make_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def gamma_k(C, eta_k, grad_norm):
    """Hessian accuracy target ``C * max(eta_k, ||g||)``."""
    return C * max(eta_k, grad_norm)


def bernstein_size(n, lambda_n, gamma, alpha):
    """Smallest D with ``P(||H_D - H_N|| <= gamma) >= 1 - alpha`` by matrix Bernstein."""
    if not (n >= 1 and lambda_n > 0 and gamma > 0 and 0 < alpha < 1):
        raise ValueError("bernstein_size: arguments out of range")
    bound = 2.0 * math.log(2.0 * n / alpha) * (lambda_n**2 + lambda_n * gamma / 3.0) / gamma**2
    return max(1, math.ceil(bound))


def chernoff_size(n, lambda_1, lambda_n, mu, alpha):
    """Smallest D with ``P(lambda_min(H_D) >= mu) >= 1 - alpha`` by matrix Chernoff.

    ``lambda_1`` is the lower curvature bound of the full objective and must
    lie in (0, 1); ``mu`` must lie in (0, 1 - lambda_1).
    """
    if not (0 < lambda_1 < 1):
        raise ValueError("lambda_1 must lie in (0, 1)")
    if not (0 < mu < 1 - lambda_1):
        raise ValueError("mu must lie in (0, 1 - lambda_1)")
    if not (n >= 1 and lambda_n > 0 and 0 < alpha < 1):
        raise ValueError("chernoff_size: arguments out of range")
    bound = 2.0 * lambda_n * (1.0 - lambda_1) ** 2 * math.log(n / alpha) / (mu**2 * lambda_1)
    return max(1, math.ceil(bound))


def adaptive_dk(eta_k, grad_norm, N, D0, prev_cg_iters, cg_threshold=20,
                slow=(1.0, 0.05), fast=(2.0, 1.0)):
    """Hessian sample size fed back from the previous CG iteration count.

    ``slow`` = (c0, c1) is used when the previous solve took more than
    ``cg_threshold`` iterations, ``fast`` otherwise.
    """
    c0, c1 = slow if prev_cg_iters > cg_threshold else fast
    inv_eta2 = 1.0 / eta_k**2
    g2 = grad_norm**2  # may underflow for tiny gradients
    inv_g2 = math.inf if g2 == 0 else 1.0 / g2
    inner = min(c1 * min(inv_eta2, inv_g2), N)
    size = math.ceil(max(c0 * D0, inner))
    return int(min(max(size, 1), N))


def draw_subsample(population, size, rng):
    """Uniform subset of ``population`` without replacement, sorted.

    Returns the whole population when ``size >= len(population)``.
    """
    population = np.asarray(population)
    if population.size == 0:
        raise ValueError("empty population")
    if size < 1:
        raise ValueError("size must be at least 1")
    if size >= population.size:
        return population.copy()
    picked = rng.choice(population.size, size=int(size), replace=False)
    return population[np.sort(picked)]


@dataclass(frozen=True)
class NkSchedule:
    """Function/gradient sample sizes.

    ``full``: always N. ``geometric``: ``min(ceil(n0 * growth**k), N)``.
    ``streaming``: ``ceil(n0 * growth**k)`` with no cap, for unbounded streams.
    """

    variant: str = "full"
    n0: int = 100
    growth: float = 2.0

    def __post_init__(self):
        if self.variant not in ("full", "geometric", "streaming"):
            raise ConfigError(f"unknown N_k schedule {self.variant!r}")
        if self.variant != "full" and not (self.n0 >= 1 and self.growth >= 1):
            raise ConfigError("schedule needs n0 >= 1 and growth >= 1")


def nk_schedule(variant, k, N=None):
    """Sample size at iteration ``k``; ``variant`` is an :class:`NkSchedule` or its name."""
    if isinstance(variant, str):
        variant = NkSchedule(variant)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if variant.variant == "full":
        return N
    size = math.ceil(variant.n0 * variant.growth**k)
    if variant.variant == "geometric":
        return min(size, N)
    return size


HESSIAN_RULES = ("full", "fixed-fraction", "bernstein", "chernoff", "adaptive-feedback")


@dataclass
class HessianSampleRule:
    """How D_k is chosen at each iteration.

    variant
        ``full`` (D_k = N_k), ``fixed-fraction`` (``fraction * N``),
        ``bernstein`` (matrix Bernstein bound with gamma_k = C max(eta_k, ||g||)),
        ``chernoff`` (matrix Chernoff bound for semidefinite components), or
        ``adaptive-feedback`` (CG-iteration feedback rule).
    alpha, alpha_decay
        Failure probability; with ``alpha_decay`` the k-th value is
        ``alpha / (k + 1)``.
    """

    variant: str = "full"
    fraction: float = 0.3
    C: float = 1.0
    alpha: float = 0.1
    alpha_decay: bool = False
    mu: float = 0.1
    d0_fraction: float = 0.1
    cg_threshold: int = 20
    slow_c: tuple = (1.0, 0.05)
    fast_c: tuple = (2.0, 1.0)

    def __post_init__(self):
        if self.variant not in HESSIAN_RULES:
            raise ConfigError(f"unknown Hessian sample rule {self.variant!r}")
        if not 0 < self.fraction <= 1:
            raise ConfigError("fraction must lie in (0, 1]")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if not self.C > 0:
            raise ConfigError("C must be positive")
        if not 0 < self.d0_fraction <= 1:
            raise ConfigError("d0_fraction must lie in (0, 1]")

    def alpha_k(self, k):
        return self.alpha / (k + 1) if self.alpha_decay else self.alpha


@dataclass
class SampleState:
    """The sets used at one iteration; ``hess_idx`` is always a subset of ``func_idx``."""

    func_idx: np.ndarray | None
    hess_idx: np.ndarray | None
    Nk: int
    Dk: int
    target: int
    rule: str
    gamma: float | None = None
