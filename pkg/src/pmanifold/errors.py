"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: bad input data or file
formats exit with 3, algorithmic failures (degenerate geometry,
disconnected clusters, ...) exit with 4.
"""


class PManifoldError(Exception):
    """Base class for all package-specific errors."""


class DataFormatError(PManifoldError):
    """Malformed or inconsistent input data (files, arrays, parameters)."""


class AlgorithmFailure(PManifoldError):
    """A pipeline stage cannot proceed on otherwise well-formed input."""
