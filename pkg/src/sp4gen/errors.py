"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: SchemaError -> 2, PreconditionError and
PrecisionError -> 3, InvariantViolation -> 4.
"""


class Sp4GenError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(Sp4GenError):
    """Malformed input data (JSON schema violations, inconsistent unions)."""


class PreconditionError(Sp4GenError):
    """An operation was called outside its documented domain."""


class UnsupportedModeError(PreconditionError):
    """Concrete arithmetic requested on an abstract (q-only) field."""


class PrecisionError(Sp4GenError):
    """A certified search ran out of depth without reaching a decision.

    Raised instead of ever returning an uncertified sign.
    """


class InvariantViolation(Sp4GenError):
    """An internal mathematical invariant failed; release blocking."""
