"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: usage errors exit 1, data/validation
errors exit 2, numerical failures exit 3.
"""


class AlphaccError(Exception):
    """Base class for all toolkit errors."""


class LexicalError(AlphaccError):
    """Unterminated literal or comment; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnbalancedBracesError(AlphaccError):
    """Function extraction ran out of tokens before a brace closed."""


class IngestError(AlphaccError):
    """Corpus ingest produced no usable functions or malformed input."""


class DatasetError(AlphaccError):
    """Dataset file failed validation (dangling ids, duplicate pairs, ...)."""


class ConfigError(AlphaccError):
    """Bad configuration value or unknown configuration key."""


class EmptyFragmentError(AlphaccError):
    """Pooling found no valid query columns to build a fragment from."""


class TrainingDivergedError(AlphaccError):
    """Non-finite loss during training; carries a batch diagnostic dump."""

    def __init__(self, message: str, batch_dump=None):
        super().__init__(message)
        self.batch_dump = batch_dump or {}


class CheckpointError(AlphaccError):
    """Checkpoint file is malformed or version-incompatible."""
