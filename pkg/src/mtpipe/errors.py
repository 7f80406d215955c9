"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
EndpointError -> 3.
"""


class ConfigError(Exception):
    """Invalid configuration or command usage."""


class DataError(Exception):
    """Input data violates a documented precondition (malformed file,
    unknown language code, misaligned line counts, ...)."""


class EndpointError(Exception):
    """The remote judge endpoint is unusable: authentication failed or
    every batch failed after retries."""


class StageError(Exception):
    """A pipeline stage failed; carries the stage name for error reports."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
