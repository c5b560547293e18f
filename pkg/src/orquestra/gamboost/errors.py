################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Exceptions raised by orquestra-gamboost.

Each class also derives from the built-in exception callers would catch
otherwise, so ``except ValueError`` keeps working.
"""
from typing import Optional


class GamboostError(Exception):
    """Base class of all errors raised by this package."""


class ConfigurationError(GamboostError, ValueError):
    """Configuration references unknown columns or sets invalid parameters."""


class DataError(GamboostError, ValueError):
    """Input data violates the declared contract."""


class SchemaError(DataError):
    """A required column is absent from the input."""


class ParseError(DataError):
    """A cell could not be interpreted according to its column kind.

    Args:
        message: description of the problem.
        column: offending column.
        row: 1-based data row (the header is not counted).
    """

    def __init__(self, message: str, column: str, row: Optional[int] = None):
        location = f"column '{column}'" + (f", row {row}" if row is not None else "")
        super().__init__(f"{message} ({location})")
        self.column = column
        self.row = row


class DomainError(GamboostError, ValueError):
    """Inputs are outside of the mathematical domain of an operation."""


class NumericalError(GamboostError, RuntimeError):
    """A numerical procedure failed (singular system, non-convergence...)."""
