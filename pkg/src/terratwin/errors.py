"""Exception hierarchy shared by all terratwin modules."""


class TwinError(Exception):
    """Base class for all terratwin domain errors."""


class ValidationError(TwinError):
    """A parameter or domain object violates its invariants."""


class ParseError(TwinError):
    """A file could not be parsed; carries the offending line when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingLayerError(TwinError):
    """A required raster layer is absent from the model."""

    def __init__(self, name: str):
        super().__init__(f"missing layer: {name!r}")
        self.layer = name


class EmptyClassError(TwinError):
    """No feature of the requested kind exists."""


class UnknownNodeError(TwinError):
    """A road-network node id does not exist."""
