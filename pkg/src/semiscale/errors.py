"""Exception types shared across the package.

The CLI maps these onto process exit codes: ``InputError`` -> 2,
``DegeneracyError`` -> 3. Everything else is a plain bug.
"""


class InputError(Exception):
    """Malformed or missing input data, files, or configuration."""


class DegeneracyError(Exception):
    """A computation hit a numerically degenerate regime (zero variance,
    singular covariance, all-flagged fit windows)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""
