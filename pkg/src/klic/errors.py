"""Exception hierarchy shared by every module of the package."""

import numpy as np


class KlicError(Exception):
    """Base class for all package errors."""


class InvalidInputError(KlicError, ValueError):
    """Malformed arguments: wrong shapes, non-finite entries, bad indices."""


class InvalidConfigError(InvalidInputError):
    """A configuration value is outside its admissible range."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class DegenerateInputError(InvalidInputError):
    """Input for which a statistic is undefined (e.g. log of a zero eigenvalue)."""


class InsufficientTrialsError(InvalidInputError):
    """Too few Monte Carlo trials for the requested false-alarm probability."""


class SingularMatrixError(KlicError, np.linalg.LinAlgError):
    """A matrix expected to be positive definite is not."""


class RankDeficiencyError(SingularMatrixError):
    """A basis matrix expected to have full column rank does not."""


class TrialFailure(KlicError):
    """A Monte Carlo trial hit a numerical degeneracy; carries what is needed to replay it."""

    def __init__(self, trial, seed, hypothesis, cause):
        self.trial = trial
        self.seed = seed
        self.hypothesis = hypothesis
        self.cause = cause
        super().__init__(f"trial {trial} (seed {seed}, hypothesis {hypothesis}) failed: {cause}")
