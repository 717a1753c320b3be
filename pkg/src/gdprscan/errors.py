"""Exception types shared across the toolkit."""


class GdprScanError(Exception):
    """Base class for all toolkit errors."""


class FetchError(GdprScanError):
    """A page could not be fetched (network failure, bad status, redirect loop)."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ParseError(GdprScanError):
    """A persisted file is malformed. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FormatError(GdprScanError):
    """A model/corpus file does not match its declared format or digest."""


class ShapeError(GdprScanError):
    """Tensor or list dimensions do not match what an operation requires."""


class InvalidLabel(GdprScanError):
    """A label code outside the defined 0..18 space, or Other where forbidden."""


class ArityError(GdprScanError):
    """A per-segment label list does not match the expected annotator count."""


class StateError(GdprScanError):
    """An operation was called in a state that does not allow it."""


class NotFound(GdprScanError):
    """A referenced segment or document is unknown to the store."""


class ModelMismatch(GdprScanError):
    """Classifier and embedding model checksums do not agree."""


class EmptyCorpus(GdprScanError):
    """No sentences available for embedding training."""


class EmptyVocab(GdprScanError):
    """Vocabulary is empty after minimum-count filtering."""


class EmptyDataset(GdprScanError):
    """A training/evaluation set that must be non-empty is empty."""


class EmptyPool(GdprScanError):
    """The unlabeled pool has no documents left to sample."""


class EmptyPolicy(GdprScanError):
    """A policy document with zero segments cannot be measured."""


class CannotSplit(GdprScanError):
    """Too few documents for a document-level train/test split."""


class IterationStalled(GdprScanError):
    """An active-learning iteration timed out waiting for labels; resumable."""


class IoError(GdprScanError):
    """A report or checkpoint path could not be written."""


class ConfigError(GdprScanError):
    """The run configuration file is missing, malformed, or inconsistent."""
