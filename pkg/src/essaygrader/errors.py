"""Exception types shared across the package."""


class EssayGraderError(Exception):
    """Base class for all package errors."""


class FormatError(EssayGraderError, ValueError):
    """A file or record does not match its documented format."""


class RangeError(EssayGraderError, ValueError):
    """A value falls outside its documented range."""


class CorpusValidationError(EssayGraderError, ValueError):
    """A corpus row violates a dataset invariant."""


class NotPermutableError(EssayGraderError, ValueError):
    """The essay has too few distinct sentences to permute meaningfully."""


class ConfigurationError(EssayGraderError, ValueError):
    """The requested operation cannot run under the given configuration."""


class CoverageError(EssayGraderError, LookupError):
    """A required precomputed record (embedding, error count) is missing."""


class DimensionError(EssayGraderError, ValueError):
    """Array shapes or declared dimensions do not line up."""


class DependencyError(EssayGraderError, RuntimeError):
    """An upstream artifact required by a command is missing or stale."""
