"""Exception types shared across the package."""


class VcrError(Exception):
    """Base class for all errors raised by this package."""


class ArchiveParseError(VcrError):
    """Malformed archive input (bad JSON, wrong structure)."""

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        loc = source or "<input>"
        if line is not None:
            loc = f"{loc}:{line}"
        super().__init__(f"{loc}: {message}")
        self.source = source
        self.line = line


class ArchiveValidationError(VcrError):
    """Structurally valid input that violates an archive invariant."""

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        loc = source or "<input>"
        if line is not None:
            loc = f"{loc}:{line}"
        super().__init__(f"{loc}: {message}")
        self.source = source
        self.line = line


class DimensionMismatchError(VcrError):
    """Vectors of incompatible dimensions were combined."""


class ProviderMismatchError(VcrError):
    """An operation mixed artifacts produced by different embedding providers."""


class IndexVersionError(VcrError):
    """Index file carries an unknown magic or version."""


class CorruptIndexError(VcrError):
    """Index file is truncated or fails its checksum."""


class EmbeddingTransportError(VcrError):
    """Remote embedding call failed after retries."""

    def __init__(self, message: str, attempts: int = 1, retryable: bool = False):
        super().__init__(message)
        self.attempts = attempts
        self.retryable = retryable
