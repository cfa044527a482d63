"""Shared exception types."""


class VcgapError(Exception):
    """Base class for all package-specific errors."""


class ParseError(VcgapError, ValueError):
    """Malformed input text; message names the offending line."""


class ArgumentError(VcgapError, ValueError):
    """An operation was called with arguments violating its preconditions."""


class ContractViolation(VcgapError, RuntimeError):
    """A computed result failed its own postcondition check.

    Raised instead of silently returning bad data; the CLI maps this to
    exit code 2 because such a failure is a finding worth investigating.
    """


class SolverError(VcgapError, RuntimeError):
    """Numeric breakdown inside a solver; message carries iteration diagnostics."""
