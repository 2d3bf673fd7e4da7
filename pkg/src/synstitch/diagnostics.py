"""Diagnostics shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .cpptok import SourceSpan

ERROR = "error"
WARNING = "warning"


@dataclass(slots=True)
class Diagnostic:
    severity: str
    message: str
    span: Optional["SourceSpan"] = None

    def format(self, file: str) -> str:
        if self.span is not None:
            return f"{file}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"
        return f"{file}: {self.severity}: {self.message}"


class SynstitchError(Exception):
    """Hard error that aborts rewriting of the current translation unit."""

    def __init__(self, message: str, span: Optional["SourceSpan"] = None):
        super().__init__(message)
        self.diagnostic = Diagnostic(ERROR, message, span)


def error(message: str, span: Optional["SourceSpan"] = None) -> Diagnostic:
    return Diagnostic(ERROR, message, span)


def warning(message: str, span: Optional["SourceSpan"] = None) -> Diagnostic:
    return Diagnostic(WARNING, message, span)
