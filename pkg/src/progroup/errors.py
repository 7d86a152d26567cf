"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, exceeded size
bounds exit 2, failed internal consistency checks exit 3.
"""


class ProgroupError(Exception):
    """Base class for all errors raised by the package."""


class InputError(ProgroupError, ValueError):
    """Malformed or inconsistent input (bad permutation, unknown group name...)."""


class BoundExceeded(ProgroupError):
    """A configured size bound would be exceeded; nothing is silently truncated."""


class ConsistencyError(ProgroupError, AssertionError):
    """Two independent computations disagree, or an exactness assertion failed."""
