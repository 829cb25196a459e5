"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """A parameter object or argument is outside its permitted domain."""


class DomainError(ValueError):
    """An operation was evaluated outside the regime where it is defined."""


class ConvergenceError(RuntimeError):
    """A numerical routine failed to reach the requested tolerance.

    Carries the best estimate obtained so far and a bound on its error so
    callers can decide whether the partial result is still usable.
    """

    def __init__(self, message: str, best_estimate: float, error_bound: float):
        super().__init__(f"{message} (best estimate {best_estimate!r}, error bound {error_bound!r})")
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class EstimationError(RuntimeError):
    """A Monte Carlo estimate is degenerate (e.g. zero sample variance)."""


class ConfigError(ValueError):
    """A run configuration file or command line could not be validated.

    line is the 1-based line number in the config file when the problem
    can be tied to one, else None.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
