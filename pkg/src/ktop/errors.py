"""Exception hierarchy shared by every module."""

from __future__ import annotations


class KtopError(Exception):
    """Base class for all library errors."""


class BudgetExhausted(KtopError):
    """Raised where a search has no value-level way to report running out of fuel."""

    def __init__(self, message: str = "budget exhausted", budget: int | None = None):
        super().__init__(message)
        self.budget = budget


class PremiseFailed(KtopError):
    """A caller-supplied premise could not be confirmed within budget."""


class ContradictionDetected(KtopError):
    """A point refuting a disjointness premise was found."""

    def __init__(self, point, message: str | None = None):
        super().__init__(message or f"premise refuted by point {point!r}")
        self.point = point


class ContractViolation(KtopError):
    """A user-supplied object broke a monotonicity (or similar) contract."""


class NotDirected(KtopError):
    """An upper-bound chooser returned something that is not an upper bound."""


class InvalidCertificate(KtopError):
    """A certificate failed its replay check."""


class BadBound(KtopError):
    """A distance bound is inconsistent with the data it should bound."""


class ParseError(KtopError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


class UsageError(KtopError):
    """Bad command-line usage (exit code 2)."""
