"""Custom exceptions."""

from collections.abc import Iterable, Sequence
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from privslice.models import Diagnostic


class PrivsliceError(Exception):
    """Base exception for privslice."""


class InputNotFoundError(PrivsliceError):
    """Raised when an app or dataset file does not exist."""


class IrSyntaxError(PrivsliceError):
    """Raised when µIR text does not conform to the grammar."""

    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()) -> None:
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
        detail = f"line {line}, column {column}: {message}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class IrValidationError(PrivsliceError):
    """Raised when parsed µIR violates a program invariant."""

    def __init__(self, diagnostics: Sequence["Diagnostic"]) -> None:
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class DatasetError(PrivsliceError):
    """Raised when a privacy dataset does not match its schema."""

    def __init__(self, message: str, path: str = "") -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DuplicateRuleError(DatasetError):
    """Raised when two dataset rules of the same kind share a prefix or keyword."""


class AnalysisError(PrivsliceError):
    """Raised when an analysis exceeds its internal bounds."""


class ConfigError(PrivsliceError):
    """Raised when the configuration file or environment holds an invalid value."""


class InputReadError(PrivsliceError):
    """Raised when an input file exists but cannot be read as UTF-8 text."""


class OutputError(PrivsliceError):
    """Raised when results cannot be written, or two results would share a file."""
