"""Exception hierarchy shared across the package.

ConfigError maps to CLI exit code 2, SolverError to 3, BranchCollapseError
to 4 (see cli.py).
"""


class ConfigError(ValueError):
    """Invalid configuration, parameters, or mismatched dimensions."""


class NumericError(RuntimeError):
    """A numerical routine produced an unusable result (NaN, lost bracket)."""


class SolverError(NumericError):
    """An iterative solver failed to converge; carries the trace if any."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BranchCollapseError(NumericError):
    """Fiber roots vanished while minimizing on a Nehari branch."""
