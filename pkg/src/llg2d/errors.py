"""Exception types shared across the solver."""


class DegenerateFieldError(ValueError):
    """A pointwise normalization hit a (numerically) zero-length vector.

    Raised by the pointwise correctors; in practice this signals loss of
    resolution or blowup rather than a coding error, so the message carries
    the offending grid location.
    """


class InstabilityError(RuntimeError):
    """A time integration produced non-finite values."""


class SecantConvergenceError(RuntimeError):
    """The scalar-multiplier secant iteration failed to converge."""
