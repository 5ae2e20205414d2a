"""Exception types shared across the package.

The CLI maps ``ConfigError`` to exit code 2 and ``NumericalError`` (and
its subclasses) to exit code 3.
"""


class ConfigError(ValueError):
    """A scenario configuration or config file is invalid."""


class NumericalError(RuntimeError):
    """A numerical operation failed in a way that invalidates the result."""


class RankDeficiencyError(NumericalError):
    """A regressor Gram matrix is rank deficient, usually a pilot problem."""


class SingularFimError(NumericalError):
    """An information matrix (or its Schur complement) is not invertible."""
