"""Exception hierarchy. Each class maps to one CLI exit code."""


class GhostDiffError(Exception):
    exit_code = 1


class ValidationError(GhostDiffError, ValueError):
    """Invalid input: bad parameters, mismatched grids, malformed config."""

    exit_code = 1

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class NumericalGuardError(GhostDiffError):
    """A sampling or resolution guard failed; results would be aliased."""

    exit_code = 2

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class ArchiveError(GhostDiffError, OSError):
    """Frame archive is unreadable, truncated or corrupt."""

    exit_code = 3
