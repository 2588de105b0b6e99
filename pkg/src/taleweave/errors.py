"""Exception taxonomy shared across the package.

Three broad families matter to callers: bad input data (``ValidationFailure``),
protocol violations against live state (``WrongStateError``), and failures of
a generative backend (``ProviderError``). The HTTP service and the CLI map
these to status codes / exit codes, so new exceptions should subclass one of
the three.
"""


class TaleWeaveError(Exception):
    """Base class for all package-specific errors."""


class ValidationFailure(TaleWeaveError):
    """Input data violates a documented contract."""


class MalformedCodeError(ValidationFailure):
    """A response code string does not parse as C{n}-{m}."""


class SchemaVersionError(ValidationFailure):
    """A persisted document declares an unsupported schema_version."""


class AssetMissingError(ValidationFailure):
    """An asset reference does not resolve in the asset store."""


class UnsupportedFormatError(ValidationFailure):
    """An export or media format is not one of the supported values."""


class WrongStateError(TaleWeaveError):
    """An operation was attempted in a session state that forbids it."""


class WrongMilestoneError(WrongStateError):
    """A response was submitted for a milestone other than the awaited one."""


class TaskAlreadyClaimedError(WrongStateError):
    """A second session tried to start on an already-claimed task."""


class TooLateError(WrongStateError):
    """A branch override arrived after its chapter was generated."""


class IncompleteSessionError(WrongStateError):
    """A compile/export was requested for a session that is not complete."""


class CorruptLogError(TaleWeaveError):
    """An event log fails replay validation."""

    def __init__(self, message: str, bad_seq: int | None = None):
        super().__init__(message)
        self.bad_seq = bad_seq


class ProviderError(TaleWeaveError):
    """A generative backend failed."""


class ProviderTimeoutError(ProviderError):
    """The remote backend did not answer within the configured budget."""


class ReplayMissError(ProviderError):
    """Replay mode was asked for a request absent from the cassette."""

    def __init__(self, digest: str):
        super().__init__(f"cassette has no entry for request digest {digest}")
        self.digest = digest


class MalformedOutputError(ProviderError):
    """Provider output failed structural validation after retries."""

    def __init__(self, message: str, raw_output: str = ""):
        super().__init__(message)
        self.raw_output = raw_output
