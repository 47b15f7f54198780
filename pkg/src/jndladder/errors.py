"""Exception types shared across the package."""


class JndLadderError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(JndLadderError):
    """Malformed or truncated media input; carries the byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SchemaError(JndLadderError):
    """A data file (JSON/CSV) violates its documented schema."""


class ModelFormatError(SchemaError):
    """A model file is corrupt or has an unsupported schema version."""


class MissingModelError(JndLadderError):
    """No model is available for a configured resolution."""


class ConfigError(JndLadderError):
    """Invalid pipeline configuration."""
