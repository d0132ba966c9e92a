"""Exception hierarchy shared by every module."""


class ImpulsiveError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(ImpulsiveError, ValueError):
    pass


class ConfigError(InvalidArgumentError):
    """A scenario document failed validation."""


class NumericalOverflowError(ImpulsiveError, ArithmeticError):
    """A nonfinite state appeared during integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class SingularJumpError(ImpulsiveError, ArithmeticError):
    def __init__(self, message, index=None, condition=None):
        super().__init__(message)
        self.index = index
        self.condition = condition


class SingularFundamentalError(ImpulsiveError, ArithmeticError):
    def __init__(self, message, time=None, condition=None):
        super().__init__(message)
        self.time = time
        self.condition = condition


class RateUndefinedError(ImpulsiveError, ValueError):
    """Log-linear fit impossible because a norm in the fit window is zero."""


class HypothesisViolated(ImpulsiveError):
    """A theorem's hypothesis does not hold for the supplied data."""


class HorizonSensitivityWarning(UserWarning):
    """A finite-horizon estimate is still growing with the horizon."""
