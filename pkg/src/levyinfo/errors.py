"""Exception types shared across the package."""


class LevyInfoError(Exception):
    """Base class for all package errors."""


class QuadratureFailure(LevyInfoError):
    """A numerical integral did not reach the requested tolerance."""


class UndefinedAtBoundary(LevyInfoError):
    """A quantity is infinite or undefined at a parameter boundary (beta = 2)."""


class TruncationFailure(LevyInfoError):
    """A series truncation left more mass than the configured cutoff allows."""


class DivergentIntegral(LevyInfoError):
    """The integrand grows in a way that signals a non-integrable quantity."""


class MomentUndefined(LevyInfoError):
    """A moment was requested for a law that does not possess it."""


class HypothesisViolation(LevyInfoError):
    """Inputs violate the hypotheses of the requested limit statement."""


class OptimizationFailure(LevyInfoError):
    """A likelihood search failed to bracket an interior maximum."""


class ConfigError(LevyInfoError):
    """Malformed run configuration (CLI or config file)."""
