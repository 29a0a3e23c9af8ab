"""Partial transposes of unitarily invariant matrices: exact Weingarten
calculus, free cumulants and Monte Carlo checks."""

from .errors import ArgumentError, ConfigError, PtlabError, ResourceLimitError, SingularSystemError

__version__ = "0.1.0"

__all__ = ["ArgumentError", "ConfigError", "PtlabError", "ResourceLimitError", "SingularSystemError"]
