"""Exception hierarchy shared by the library, the CLI and the JSON API.

Every error carries the process exit code the CLI returns for it.
"""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DOMAIN = 2
EXIT_CAPACITY = 3
EXIT_USAGE = 64


class ChandelierError(Exception):
    """Base class for all errors raised by this project."""

    exit_code = EXIT_FAILURE


class ParameterDomainError(ChandelierError, ValueError):
    """A parameter lies outside the domain an operation is defined on."""

    exit_code = EXIT_DOMAIN


class CapacityError(ChandelierError):
    """The request is valid but too large for the exhaustive code paths."""

    exit_code = EXIT_CAPACITY


class UsageError(ChandelierError):
    """Unknown subcommand, flag, or malformed config file."""

    exit_code = EXIT_USAGE


class SolverError(ChandelierError):
    """A numerical routine produced a result that fails its own verification."""

    exit_code = EXIT_FAILURE
