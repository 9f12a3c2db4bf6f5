"""Executable effective topology: semidecidable truth values, a register-machine
kernel, represented spaces, point recovery, and modulus extraction."""

from .errors import (BadBound, BudgetExhausted, ContractViolation, ContradictionDetected,
                     InvalidCertificate, KtopError, NotDirected, ParseError, PremiseFailed,
                     UsageError)

__version__ = "0.1.0"

__all__ = [
    "BadBound", "BudgetExhausted", "ContractViolation", "ContradictionDetected",
    "InvalidCertificate", "KtopError", "NotDirected", "ParseError", "PremiseFailed",
    "UsageError", "__version__",
]
