"""Shared exception types."""


class AirlogError(Exception):
    """Base class for all domain errors raised by this package."""


class KbDocumentError(AirlogError):
    """Malformed KB document (syntax or shape). Carries an optional position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}" + (f", column {col})" if col is not None else ")")
        super().__init__(message)


class KbValidationError(AirlogError):
    """A knowledge base failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"knowledge base is invalid:\n{lines}")


class StreamError(AirlogError):
    """Bad sample stream content; carries the offending row number."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"{message} (stream row {row})"
        super().__init__(message)


class UnclassifiableValueError(AirlogError):
    """A sensor value fell outside every declared range."""


class StepOrderError(AirlogError):
    """Cumulative steps must be added in strictly increasing order."""


class UnsupportedProgramError(AirlogError):
    """The bundled solver only evaluates locally stratified programs."""


class AtomBudgetError(AirlogError):
    """Brute-force enumeration would exceed its atom budget."""


class EngineError(AirlogError):
    """Replay-level failure (missing initial states, invariant breach, ...)."""


class ProgramTextError(AirlogError):
    """Unparseable textual logic program. Carries the offending line."""

    def __init__(self, message, line=None):
        self.lineno = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
