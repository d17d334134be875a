"""Exception types shared across the package.

Everything user-facing derives from ValueError so callers (and the CLI)
can distinguish bad input from genuine I/O failures (OSError).
"""


class ColexvecError(ValueError):
    """Base class for all input and validation failures."""


class ParseError(ColexvecError):
    """A file could not be parsed; carries path and 1-based line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class ValidationError(ColexvecError):
    """Structurally parseable input that violates an invariant."""


class InsufficientDataError(ColexvecError):
    """Too little evaluable data to compute the requested statistic."""


class SamplingError(ColexvecError):
    """Negative sampling could not satisfy its constraints."""
