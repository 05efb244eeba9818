"""Error types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A configured memory / search / node budget was exceeded."""


class CacheFormatError(ValueError):
    """A persisted sieve file is corrupt or has an unknown layout."""
