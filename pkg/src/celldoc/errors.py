"""Exception types shared across the package."""
from __future__ import annotations


class CelldocError(Exception):
    """Base class for every error raised by this package."""


class MalformedNotebook(CelldocError):
    """Notebook container is not parseable (bad JSON, wrong shape)."""


class UnsupportedFormatVersion(CelldocError):
    """Notebook container parsed but its format version is not supported."""


class InvalidBounds(CelldocError):
    """Word-count bounds with min > max."""


class ParseError(CelldocError):
    """Cell source is syntactically invalid after sanitization."""


class EmptyCorpus(CelldocError):
    """An operation that needs at least one row received none."""


class MissingEmbeddings(CelldocError):
    """An embedding-based sampler was asked of an index without embeddings."""


class ProviderUnavailable(CelldocError):
    """Embedding provider could not be reached after retries."""


class AuthError(CelldocError):
    """Endpoint rejected the request credentials."""


class RateLimited(CelldocError):
    """Endpoint kept rate-limiting after all retries.

    Attributes:
        attempts: number of requests made before giving up.
    """

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class Timeout(CelldocError):
    """Request exceeded the configured timeout."""


class ProviderError(CelldocError):
    """Endpoint returned an unexpected error response."""


class MetricsUnavailable(CelldocError):
    """A with-metric prompt was requested but metric extraction failed."""


class TooFewPairs(CelldocError):
    """Fewer than five nonzero differences for the signed-rank test."""


class CorpusTooSmall(CelldocError):
    """Corpus has too few items for the requested split strategy."""


class UnparseableJudgeOutput(CelldocError):
    """Judge response failed validation twice for the same candidate."""


class EmptyRun(CelldocError):
    """An evaluation run with no records cannot be aggregated."""


class ConfigInvalid(CelldocError):
    """Pipeline configuration failed validation."""


class StageFailed(CelldocError):
    """A pipeline stage failed at runtime.

    Attributes:
        stage: name of the failed stage.
    """

    def __init__(self, stage: str, cause: BaseException | str):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause if isinstance(cause, BaseException) else None
