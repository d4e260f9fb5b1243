"""Exception types shared across the toolkit."""


class BBPEKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(BBPEKitError):
    """Invalid training target or penalty configuration."""


class IngestError(BBPEKitError):
    """Corpus ingestion failed; carries the 1-based line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class VersionError(BBPEKitError):
    """Vocabulary file declares an unsupported format version."""


class CorruptVocabError(BBPEKitError):
    """Vocabulary data violates an invariant; the message names it."""


class IncompatibleVocabError(BBPEKitError):
    """Two vocabularies cannot be combined or compared."""


class OovError(BBPEKitError):
    """Encoding met a character absent from a closed-set vocabulary."""


class DecodeError(BBPEKitError):
    """Token sequence refers to ids unknown to the vocabulary."""


class InputError(BBPEKitError):
    """Metric inputs are malformed (length mismatch, empty list)."""
