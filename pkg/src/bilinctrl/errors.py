"""Exception types shared across the package."""


class BilinearControlError(Exception):
    """Base class for all package errors."""


class DomainError(BilinearControlError, ValueError):
    """An index or point lies outside the admissible domain."""


class ModelError(BilinearControlError):
    """A structural assumption on the spectral model is violated."""


class NumericError(BilinearControlError):
    """A numerical computation produced an invalid result (NaN, overflow)."""


class QuadratureError(NumericError):
    """Adaptive quadrature failed to converge within the refinement cap.

    Carries the last two panel estimates so the caller can judge how far
    apart they were.
    """

    def __init__(self, message, last_estimate=None, previous_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.previous_estimate = previous_estimate


class DegeneracyError(BilinearControlError):
    """Frequency collision that violates the moment-problem hypotheses."""


class IllConditionedError(BilinearControlError):
    """Gram system condition number above the configured cap."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ControllabilityDefectError(BilinearControlError):
    """A coupling coefficient needed by the control construction vanishes."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NonConvergenceError(BilinearControlError):
    """The steering iteration diverged; carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class ConfigError(BilinearControlError, ValueError):
    """Experiment configuration is malformed."""
