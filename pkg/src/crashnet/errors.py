"""Exception hierarchy shared by all crashnet modules.

Each error category maps to a CLI exit code and an HTTP status so the
service and the thin-client CLI agree on failure semantics.
"""


class CrashnetError(Exception):
    """Base class for all crashnet errors."""

    category = "validation"


class ParameterError(CrashnetError):
    """A caller-supplied argument violates a precondition."""

    category = "validation"


class ParseError(CrashnetError):
    """A file or wire payload could not be parsed."""

    category = "validation"


class NetworkInvariantError(CrashnetError):
    """A loaded network violates a structural invariant."""

    category = "validation"


class NumericError(CrashnetError):
    """A numerical operation failed (e.g. singular matrix)."""

    category = "numeric"


class ResourceError(CrashnetError):
    """A configured size/term/memory cap would be exceeded."""

    category = "resource"


class GadgetError(CrashnetError):
    """A quadratization gadget failed its brute-force certification."""

    category = "numeric"

    def __init__(self, message, energy_table=None, witness=None):
        super().__init__(message)
        self.energy_table = energy_table
        self.witness = witness


class RemoteError(CrashnetError):
    """Remote sampler transport failure or corrupted response."""

    category = "remote"


# CLI exit codes per category (0 is success).
EXIT_CODES = {
    "validation": 2,
    "numeric": 3,
    "resource": 4,
    "remote": 5,
}


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, CrashnetError):
        return EXIT_CODES.get(exc.category, 2)
    return 1
