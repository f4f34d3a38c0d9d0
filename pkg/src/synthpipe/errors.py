"""Exception hierarchy shared across the toolchain.

Exit codes follow the CLI contract: 1 validation, 2 I/O, 3 data integrity.
OSError is mapped to 2 by the CLI and needs no class here.
"""


class PipelineError(Exception):
    """Base class for errors the CLI turns into a nonzero exit code."""

    exit_code = 1


class ConfigError(PipelineError):
    """Invalid configuration or command arguments."""

    exit_code = 1


class DataError(PipelineError):
    """Malformed or internally inconsistent input data."""

    exit_code = 3


class StlError(DataError):
    """STL payload that cannot be parsed."""
