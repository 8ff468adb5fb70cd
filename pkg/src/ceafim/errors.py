"""Exception hierarchy shared by the library and the CLI."""


class FimError(Exception):
    """Base class for every error raised by ceafim."""


class ParseError(FimError):
    """Malformed input file. Carries the offending line number when known."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ValidationError(FimError):
    """Input is well-formed but violates a structural requirement."""


class UnknownNodeError(FimError):
    """A node id does not exist in the graph it refers to."""


class CoverageError(ValidationError):
    """Some graph node belongs to no group."""


class ContractViolation(FimError):
    """A caller broke an operation's precondition."""


class InvariantError(FimError):
    """An internal invariant was breached; indicates a bug."""
