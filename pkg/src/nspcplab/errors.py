"""Shared exception types."""


class ScopeExceeded(RuntimeError):
    """An exhaustive computation was requested beyond its stated budget.

    Raised instead of silently falling back to sampling; the message names
    the bound that was exceeded.
    """


class InvalidInput(ValueError):
    """A rejected input: dimension mismatch, malformed circuit, bad scope."""
