"""Exception types shared across the package.

Each maps to a process exit code in the command line driver:
configuration 2, assumption violation 3, numerical failure 4.
"""


class ActiveRodsError(Exception):
    """Base class for package errors."""

    exit_code = 4


class ConfigurationError(ActiveRodsError):
    """Bad user input: config files, parameter ranges, grid requests."""

    exit_code = 2


class GridError(ConfigurationError):
    """Grid construction constraint violated (treated as configuration)."""


class AssumptionViolationError(ActiveRodsError):
    """Structural model assumption broken, e.g. the speed field is not
    bounded away from zero."""

    exit_code = 3


class NumericalFailureError(ActiveRodsError):
    """Runtime numerical breakdown: NaN, negative mass, lost invariants."""

    exit_code = 4


class FitError(ActiveRodsError):
    """Order-fitting input is unusable (too few points, nonpositive errors)."""

    exit_code = 4
