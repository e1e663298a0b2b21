"""Exception types shared across the pipeline."""


class DayshiftError(Exception):
    """Base class for all library errors."""


class DatasetError(DayshiftError):
    """Raised when a dataset directory or manifest is unusable."""


class ManifestError(DatasetError):
    """Raised for malformed manifest or correspondence rows."""


class VocabularyError(DatasetError):
    """Raised for unknown class names or class ids."""


class ConfigError(DayshiftError):
    """Raised for invalid or inconsistent configuration."""


class ShapeError(DayshiftError):
    """Raised when tensor shapes violate an operation's contract."""


class NumericError(DayshiftError):
    """Raised on non-finite values where finiteness is required."""


class CheckpointError(DayshiftError):
    """Base class for checkpoint load failures."""


class CheckpointFormatError(CheckpointError):
    """Wrong magic bytes or otherwise unrecognizable file."""


class CheckpointVersionError(CheckpointError):
    """Recognized archive with an unsupported format version."""


class CheckpointTruncatedError(CheckpointError):
    """Archive ended before the declared contents were read."""


class CompatibilityError(DayshiftError):
    """Checkpoint and config digests do not match."""


class TrainingDivergenceError(DayshiftError):
    """Non-finite loss encountered during training."""

    def __init__(self, step, message="non-finite loss"):
        super().__init__(f"{message} at step {step}")
        self.step = step
