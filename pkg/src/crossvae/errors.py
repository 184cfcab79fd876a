"""Exception types shared across the package."""


class CrossVaeError(Exception):
    """Base class for every error raised by this package."""


class ParseError(CrossVaeError):
    """Malformed stroke JSON input. Carries the 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(CrossVaeError):
    """Structurally readable input that violates a domain invariant."""


class ShapeError(CrossVaeError):
    """Shape disagreement between coupled tensor arguments."""


class CheckpointError(CrossVaeError):
    """Unreadable or incompatible checkpoint file. Carries a byte offset when known."""

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class TrainingError(CrossVaeError):
    """Training aborted: non-finite loss or inconsistent configuration."""
