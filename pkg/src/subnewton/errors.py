"""Exception types raised by the solver stack."""


class NumericalFailure(ArithmeticError):
    """A NaN or Inf appeared where a finite value was required."""


class LineSearchFailure(RuntimeError):
    """Backtracking exhausted its budget without satisfying the acceptance test."""

    def __init__(self, message, t=None, f_trial=None, backtracks=None):
        super().__init__(message)
        self.t = t
        self.f_trial = f_trial
        self.backtracks = backtracks


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""
