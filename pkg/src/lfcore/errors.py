"""Exception hierarchy shared by every stage of the pipeline.

Each error carries an ``error_class`` string. Those strings are the stable
names used by scenario ``submit-must-fail`` steps and by CLI diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Source region, 1-based lines and columns, end inclusive."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


class LfError(Exception):
    error_class = "Error"

    def __init__(self, message: str, span: Span | None = None, error_class: str | None = None):
        super().__init__(message)
        self.message = message
        self.span = span
        if error_class is not None:
            self.error_class = error_class

    def diagnostic(self) -> str:
        where = str(self.span) if self.span else "<input>"
        return f"{where}: {self.error_class}: {self.message}"


class ParseError(LfError):
    error_class = "SyntaxError"


# classes: UnboundVar, KindMismatch, TypeMismatch, NotSaturated, NotSerializable,
# UnknownRef, NonEmptySignatoryUnprovable, BadTemplate, CyclicPackageDependency
class LfTypeError(LfError):
    error_class = "TypeMismatch"


class EvalError(LfError):
    """A fatal expression-evaluation error (overflow, abort, failed match, ...)."""

    error_class = "EvaluationError"


class UpdateError(LfError):
    """Failure while interpreting an update against the ledger state."""

    error_class = "UpdateError"

    def __init__(self, error_class: str, message: str):
        super().__init__(message, error_class=error_class)


class AuthorizationError(UpdateError):
    def __init__(self, message: str, missing: frozenset[str], path: tuple[int, ...]):
        super().__init__("AuthorizationError", message)
        self.missing = missing
        self.path = path


class ValidationError(LfError):
    error_class = "SemanticMismatch"

    def __init__(self, error_class: str, message: str, path: tuple[int, ...] = ()):
        super().__init__(message, error_class=error_class)
        self.path = path


class ScenarioError(LfError):
    error_class = "ScenarioError"
