"""Exception hierarchy. Exit codes: 2 validation/config, 3 backend, 4 stale run."""


class DocpipeError(Exception):
    exit_code = 1


class CorpusValidationError(DocpipeError):
    exit_code = 2


class ConfigError(DocpipeError):
    exit_code = 2


class BackendError(DocpipeError):
    exit_code = 3


class TransportError(BackendError):
    """Network or timeout failure; retryable."""


class ProtocolError(BackendError):
    """Malformed request or response; never retried."""


class ContextOverflowError(BackendError):
    """Input exceeds the backend's context budget; raised before dispatch."""


class StageError(DocpipeError):
    exit_code = 3


class StaleRunError(DocpipeError):
    exit_code = 4
