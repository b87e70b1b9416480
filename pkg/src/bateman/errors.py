"""Exception and warning types raised across the package."""


class BatemanError(Exception):
    pass


class GammaPoleError(BatemanError, ValueError):
    """Gamma function requested at (or within 1e-8 of) a non-positive integer."""

    def __init__(self, z, nearest):
        self.z = z
        self.nearest = nearest
        super().__init__(f"log_gamma evaluated at a pole: z={z!r} is within 1e-8 of {nearest}")


class DivergenceError(BatemanError, ArithmeticError):
    """Integral or series that could not be brought below tolerance.

    ``partial`` carries the best estimate reached and ``error`` its error estimate.
    """

    def __init__(self, message, partial=None, error=None):
        self.partial = partial
        self.error = error
        super().__init__(message)


class SingularEvaluationError(BatemanError, ValueError):
    pass


class DomainError(BatemanError, ValueError):
    pass


class NoClosedFormError(DomainError):
    pass


class NearPoleError(BatemanError, ValueError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class ChartSingularityError(BatemanError, ValueError):
    pass


class OverdampedError(BatemanError, ValueError):
    pass


class AccuracyWarning(UserWarning):
    pass
