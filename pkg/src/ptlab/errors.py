"""Exception hierarchy shared by every ptlab module."""


class PtlabError(Exception):
    """Base class for all library errors."""


class ArgumentError(PtlabError, ValueError):
    """An argument violates an operation's precondition."""


class ResourceLimitError(PtlabError):
    """A request exceeds a configured enumeration or solver cap."""


class SingularSystemError(PtlabError, ArithmeticError):
    """The Weingarten Gram system is singular (dimension smaller than order)."""


class ConfigError(PtlabError):
    """An experiment configuration is malformed."""
