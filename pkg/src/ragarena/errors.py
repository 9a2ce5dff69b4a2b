"""Exception hierarchy shared across the package."""


class RagArenaError(Exception):
    """Base class for all package errors."""


class ValidationError(RagArenaError):
    """Input violates a documented invariant (duplicate id, bad range, malformed record)."""


class ParseError(RagArenaError):
    """A file could not be parsed; message names the offending line."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class NotFoundError(RagArenaError):
    """A referenced id or resource does not exist."""


class TransportError(RagArenaError):
    """A backend call failed after the configured retries."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")
        self.attempts = attempts


class ConfigurationError(RagArenaError):
    """A config file or session setup request is inconsistent."""


class GenerationError(RagArenaError):
    """A generation client produced output that cannot be used."""


class DeadlineError(RagArenaError):
    """A submission arrived outside the session window."""
