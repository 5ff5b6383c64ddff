"""Shared exception types for the caprag engine."""


class CapragError(Exception):
    """Base class for all engine errors."""


class ContractError(CapragError):
    """A caller violated an operation precondition (bad dimension, duplicate id, ...)."""


class IngestionError(CapragError):
    """Malformed corpus source. Carries the 1-based source line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TransportError(CapragError):
    """An HTTP call failed. Carries the status code when one was received."""

    def __init__(self, message: str, status: int | None = None):
        self.status = status
        super().__init__(message)


class GatewayError(CapragError):
    """A chat-completion backend failed after exhausting its retry policy."""


class ConfigError(CapragError):
    """A pipeline configuration file is invalid."""
