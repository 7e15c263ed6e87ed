"""Exception hierarchy shared by all sharpcsp modules.

The CLI maps these onto exit codes: parse failures exit 2, resource limits
exit 3, precondition violations exit 4 and internal verification failures
exit 5.
"""


class SharpCspError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SharpCspError):
    """Malformed input text (languages, instances, graphs, gadgets)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownNameError(ParseError):
    """A relation or variable name that cannot be resolved."""


class PreconditionError(SharpCspError):
    """An operation was called outside its stated domain."""


class NoWitnessError(PreconditionError):
    """A witness finder was called on a relation that has no witness."""


class ResourceLimitError(SharpCspError):
    """An enumeration would exceed the configured variable cap."""


class VerificationError(SharpCspError):
    """An internal self-check failed; this always indicates a bug."""
