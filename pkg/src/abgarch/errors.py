"""Exception types shared across the package."""


class SpecError(ValueError):
    """Invalid model specification or operation argument."""


class DataError(ValueError):
    """Malformed or inadmissible input data."""


class DivergenceError(ArithmeticError):
    """A requested unconditional moment does not exist."""


class FilterError(RuntimeError):
    """Variance filtering produced a non-positive conditional variance."""


class FitError(RuntimeError):
    """Estimation failed to converge after the restart schedule."""
