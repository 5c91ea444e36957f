"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, ProviderError -> 3,
DataError -> 4.
"""


class LlmcdError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(LlmcdError):
    """Invalid configuration: unknown prompt variant, bad provider spec,
    unusable chunk budget, malformed mock parameters."""


class ChunkBudgetError(ConfigError):
    """A node line cannot be represented within the configured token budget."""

    def __init__(self, node: int, message: str):
        super().__init__(message)
        self.node = node


class DataError(LlmcdError):
    """Invalid or inconsistent input data (edge lists, label files,
    partitions)."""


class EdgeListParseError(DataError):
    """Malformed edge-list text; carries the offending line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class LabelFileError(DataError):
    """Malformed or conflicting label file."""


class UnknownNodeError(DataError):
    """A node id was requested that the graph does not contain."""


class NoOverlapError(DataError):
    """Predicted and ground-truth partitions cover disjoint node sets."""


class AlignmentError(DataError):
    """Chunk label alignment is impossible (no usable anchor overlap)."""


class ProviderError(LlmcdError):
    """Base class for chat-completion provider failures."""


class AuthError(ProviderError):
    """API key environment variable missing or rejected by the provider."""


class ContextLengthError(ProviderError):
    """The request does not fit in the provider's context window."""


class RetriesExhaustedError(ProviderError):
    """All retry attempts failed; ``__cause__`` holds the last failure."""


class MalformedReplyError(ProviderError):
    """The provider reply could not be interpreted (missing fields,
    non-JSON body)."""
