"""Exception hierarchy shared by all modules.

Config mistakes raise :class:`InvalidConfigError`, numerical breakdowns raise a
subclass of :class:`NumericalError`, and the CLI maps these onto exit codes
(2 for config, 3 for numerics, 4 for I/O).
"""

from __future__ import annotations


class PdeinvError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(PdeinvError):
    """A configuration value violates its contract."""


class UnsupportedGridError(InvalidConfigError):
    """Operation requires a grid property (e.g. periodicity) the grid lacks."""


class InvalidParamsError(InvalidConfigError):
    """Parameter vector is missing a slot or has the wrong slots."""


class NumericalError(PdeinvError):
    """Base class for runtime numerical failures."""


class DivergenceError(NumericalError):
    """Solver state became non-finite."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class IntegrationFailureError(NumericalError):
    """Adaptive integrator failed to converge."""

    def __init__(self, message: str, last_good_time: float | None = None):
        super().__init__(message)
        self.last_good_time = last_good_time


class SolverFailureError(NumericalError):
    """Linear solve did not reach the requested residual."""

    def __init__(self, message: str, achieved_residual: float | None = None):
        super().__init__(message)
        self.achieved_residual = achieved_residual


class InvalidCoefficientError(NumericalError):
    """Coefficient field violates positivity or value-set constraints."""


class IllPosedError(NumericalError):
    """Inverse estimate is degenerate (vanishing normal-equation denominator)."""


class InsufficientWindowError(InvalidConfigError):
    """Trajectory window has too few frames for the requested derivatives."""


class UndefinedMetricError(NumericalError):
    """Metric is undefined for the given inputs (zero norm, constant data)."""


class DegenerateGridError(NumericalError):
    """Degradation removed every grid line along an axis."""


class EmptyTrainSplitError(InvalidConfigError):
    """Split bands exhaust the parameter set, leaving nothing to train on."""
