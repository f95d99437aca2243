"""Error taxonomy shared by the library, the HTTP service, and the CLI.

The CLI maps these onto its exit codes (2, 3, 4, 5 in the order below);
the service maps them onto HTTP statuses.
"""


class FppError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class InvalidInputError(FppError):
    code = "invalid_input"


class SizeCapError(FppError):
    """A requested computation exceeds a hard size cap and would hang."""

    code = "size_cap"


class VerificationError(FppError):
    """A self-certifying construction failed its verification pass."""

    code = "verification_failure"


class TheoremViolationError(FppError):
    """A computed value contradicts a proved statement.

    In practice this signals an implementation bug, but it must never be
    swallowed: falsification pressure is the point of the tool.
    """

    code = "theorem_violation"
