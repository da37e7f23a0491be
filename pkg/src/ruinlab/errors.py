"""Semantic exception types shared across the package.

Every error raised on purpose derives from RuinLabError, so callers can
catch the package's failures without also swallowing genuine bugs. The
concrete classes double as ValueError so that sloppy call sites relying on
the stdlib idiom keep working.
"""


class RuinLabError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(RuinLabError, ValueError):
    """A model or configuration parameter is outside its legal domain."""


class MomentDivergenceError(RuinLabError, ValueError):
    """A requested moment does not exist for the given distribution."""


class BracketError(RuinLabError, ValueError):
    """A root finder was given a bracket that does not contain a sign change."""


class InsufficientDataError(RuinLabError, ValueError):
    """Too few usable data points to perform the requested estimate."""


class ConfigError(RuinLabError, ValueError):
    """A run configuration is malformed or two configurations disagree."""
