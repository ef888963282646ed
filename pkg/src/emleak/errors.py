"""Exception types shared across the package."""


class EmleakError(Exception):
    """Base class for all package-specific errors."""


class SpecValidationError(EmleakError, ValueError):
    """One or more parameter invariants are violated.

    Carries the full list of violations so callers can report them all at
    once instead of failing on the first.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class UnsupportedModeError(EmleakError, ValueError):
    """Requested topology/drive-mode combination has no defined solution."""


class NumericalAccuracyError(EmleakError, ArithmeticError):
    """A numerical result failed an accuracy or completeness bound."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StabilityError(NumericalAccuracyError):
    """Fixed-step integration refused: the step is too coarse for the
    fastest dynamics of the system."""


class InsufficientClassesError(EmleakError, ValueError):
    """Too few populated leakage classes to estimate a signal variance."""


class SweepPointError(EmleakError):
    """A sweep failed at one axis point; carries the offending axis value."""

    def __init__(self, axis_value, cause):
        self.axis_value = axis_value
        self.cause = cause
        super().__init__(f"sweep point {axis_value!r}: {cause}")
