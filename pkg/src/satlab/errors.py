"""Exception hierarchy shared across the package.

The command line maps these onto exit codes: invalid input is 1,
violated mathematical hypotheses are 2, solver or experiment
nonconvergence is 3.
"""

from __future__ import annotations

__all__ = [
    "SatlabError",
    "InvalidInputError",
    "ConfigError",
    "DomainError",
    "HypothesisViolationError",
    "NoSolutionError",
    "NonconvergenceError",
    "InsufficientDataError",
    "ExperimentError",
]


class SatlabError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(SatlabError, ValueError):
    """Malformed argument: wrong shape, wrong sign, wrong type."""


class ConfigError(InvalidInputError):
    """A configuration document failed validation."""


class DomainError(SatlabError):
    """A point left the certified ball around the ground truth."""


class HypothesisViolationError(SatlabError):
    """A stated mathematical hypothesis does not hold for the inputs."""


class NoSolutionError(SatlabError):
    """The discrepancy equation has no solution for the given data."""


class NonconvergenceError(SatlabError):
    """An iteration reached its cap without meeting its tolerance."""


class InsufficientDataError(SatlabError):
    """Too few usable samples to fit or summarize anything."""


class ExperimentError(SatlabError):
    """Every cell of an experiment failed; nothing to report."""
