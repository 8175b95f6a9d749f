"""Exception hierarchy shared across the pipeline."""


class CommitgateError(Exception):
    """Base class for all library errors."""


class ParseError(CommitgateError):
    """Malformed git-log input.

    Carries the byte offset of the failing record and its index in the
    stream so operators can locate the damage in multi-gigabyte logs.
    """

    def __init__(self, message, *, byte_offset=None, record_index=None):
        self.byte_offset = byte_offset
        self.record_index = record_index
        where = []
        if record_index is not None:
            where.append(f"record {record_index}")
        if byte_offset is not None:
            where.append(f"byte offset {byte_offset}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class ConfigError(CommitgateError):
    """Invalid configuration or operator-supplied input file."""


class FetchError(CommitgateError):
    """Remote API failure that survived retrying."""


class AuthError(FetchError):
    """Authentication rejected; retrying cannot help."""


class DataError(CommitgateError):
    """Inputs that are structurally valid but statistically unusable."""


class CollinearityError(DataError):
    """Design matrix is singular; names the offending covariates."""

    def __init__(self, columns, message=None):
        self.columns = list(columns)
        if message is None:
            message = f"collinear covariate set remains: {', '.join(self.columns)}"
        super().__init__(message)


class ConvergenceError(CommitgateError):
    """An estimator failed to converge where a result was required."""


class StageError(CommitgateError):
    """A pipeline stage failed; wraps the cause and names the stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
