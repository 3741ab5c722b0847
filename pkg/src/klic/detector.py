"""Penalized-GLR decision rules over a set of competing alternative hypotheses.

A scenario supplies one GLR log-statistic ``lambda_m`` per alternative and a
parameter count ``p_m``. The one-stage rule compares
``max_m (lambda_m - h(m))`` with a threshold; the two-stage rule first picks
``m_hat`` by the same penalized maximum and then thresholds ``lambda_{m_hat}``
alone. Both are available for single score lists (dataclass API) and for
``(trials, M)`` arrays (vectorized API used by the Monte Carlo engine).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidConfigError, InvalidInputError


class PenaltyKind(enum.Enum):
    HALF_P = "half_p"
    FULL_P = "full_p"
    GIC = "gic"
    BIC_T = "bic_t"
    BIC_K = "bic_k"


@dataclass(frozen=True)
class PenaltyRule:
    """Penalty family plus the GIC tuning parameter ``rho`` (must exceed 1)."""

    kind: PenaltyKind
    rho: float | None = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            try:
                object.__setattr__(self, "kind", PenaltyKind(self.kind.lower()))
            except ValueError:
                names = ", ".join(k.value for k in PenaltyKind)
                raise InvalidConfigError("rule", f"unknown penalty {self.kind!r} (choose {names})") from None
        if self.kind is PenaltyKind.GIC:
            if self.rho is None or not self.rho > 1:
                raise InvalidConfigError("rho", f"GIC requires rho > 1, got {self.rho}")
        elif self.rho is not None:
            raise InvalidConfigError("rho", f"rho is only meaningful for GIC, not {self.kind.value}")

    @property
    def label(self):
        if self.kind is PenaltyKind.GIC:
            return f"gic{self.rho:g}"
        return self.kind.value

    @property
    def uses_k(self):
        return self.kind is PenaltyKind.BIC_K


def penalty(rule, p, t_or_k):
    """Penalty ``h`` for a model with ``p`` real parameters.

    ``t_or_k`` is the number of real observations ``T`` for ``BIC_T`` and the
    training count ``K`` for ``BIC_K``; the other rules ignore it.
    """
    if np.any(np.asarray(p) < 1):
        raise InvalidInputError(f"parameter count must be >= 1, got {p}")
    if t_or_k < 2:
        raise InvalidInputError(f"T or K must be >= 2, got {t_or_k}")
    kind = rule.kind
    if kind is PenaltyKind.HALF_P:
        return p / 2
    if kind is PenaltyKind.FULL_P:
        return p * 1.0
    if kind is PenaltyKind.GIC:
        return (1 + rule.rho) * p / 2
    return p / 2 * math.log(t_or_k)


def penalty_vector(rule, counts, t, k):
    """Penalties for every hypothesis given parameter counts, ``T`` and ``K``."""
    counts = np.asarray(counts, dtype=float)
    return np.asarray(penalty(rule, counts, k if rule.uses_k else t), dtype=float)


@dataclass(frozen=True)
class HypothesisScore:
    m: int
    lam: float
    p: int
    penalty: float

    def __post_init__(self):
        if self.m < 1:
            raise InvalidInputError(f"hypothesis index must be >= 1, got {self.m}")
        if self.p < 1:
            raise InvalidInputError(f"parameter count must be >= 1, got {self.p}")
        if not math.isfinite(self.lam):
            raise InvalidInputError(f"GLR statistic for m={self.m} is not finite")


@dataclass(frozen=True)
class Decision:
    """``m_hat == 0`` means the null hypothesis was retained."""

    detected: bool
    m_hat: int
    score: float


def _penalized(scores):
    if not scores:
        raise InvalidInputError("no hypothesis scores given")
    values = [s.lam - s.penalty for s in scores]
    best = int(np.argmax(values))  # first maximum -> smallest m on ties
    return scores[best], values[best]


def one_stage_decide(scores, eta):
    best, value = _penalized(sorted(scores, key=lambda s: s.m))
    detected = value > eta
    return Decision(detected, best.m if detected else 0, value)


def two_stage_decide(scores, eta):
    """Order selection by penalized maximum, then a GLRT at the selected order."""
    best, _ = _penalized(sorted(scores, key=lambda s: s.m))
    detected = best.lam > eta
    return Decision(detected, best.m if detected else 0, best.lam)


def decision_statistic(lam, h, two_stage=False):
    """Vectorized detection statistic and selected order.

    Parameters
    ----------
    lam : ndarray, shape (trials, M)
        GLR log-statistics, column ``j`` for hypothesis ``m = j + 1``.
    h : ndarray, shape (M,)
        Penalties.
    two_stage : bool
        Return ``lam[m_hat]`` instead of the penalized maximum.

    Returns
    -------
    stat : ndarray, shape (trials,)
    m_hat : ndarray of int, shape (trials,)
        1-based index of the penalized maximum (smallest on ties).
    """
    lam = np.atleast_2d(lam)
    pen = lam - np.asarray(h)[None, :]
    idx = np.argmax(pen, axis=1)
    rows = np.arange(lam.shape[0])
    stat = lam[rows, idx] if two_stage else pen[rows, idx]
    return stat, idx + 1


@dataclass(frozen=True)
class ModelPrior:
    """Prior ``pi(p) = exp(-g(p)) / A`` over a finite support of model sizes."""

    g: Callable[[float], float]
    support: Sequence[int]
    check_increasing: bool = True

    def __post_init__(self):
        support = tuple(sorted(self.support))
        if not support:
            raise InvalidInputError("prior support is empty")
        object.__setattr__(self, "support", support)
        values = [self.g(p) for p in support]
        if self.check_increasing:
            if any(v <= 0 for v in values):
                raise InvalidConfigError("g", "must be positive on the support")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise InvalidConfigError("g", "must be strictly increasing on the support")

    @classmethod
    def uniform(cls, support):
        return cls(lambda p: 1.0, support, check_increasing=False)

    @property
    def log_a(self):
        return float(np.logaddexp.reduce([-self.g(p) for p in self.support]))

    def log_pmf(self, p):
        return -self.g(p) - self.log_a


def map_ml_decide(loglik_by_p, loglik_h0, prior, eta):
    """Joint MAP/ML rule: ``max_p {loglik(p) + log pi(p)} - loglik_H0 > eta``.

    ``m_hat`` is the 1-based position of the selected model size in the sorted
    support. With ``g`` equal to the penalty this reproduces
    :func:`one_stage_decide` at threshold ``eta + log A``.
    """
    if not loglik_by_p:
        raise InvalidInputError("empty model-size domain")
    if set(loglik_by_p) != set(prior.support):
        raise InvalidInputError("log-likelihood keys must match the prior support")
    log_a = prior.log_a
    values = [loglik_by_p[p] - prior.g(p) - log_a - loglik_h0 for p in prior.support]
    best = int(np.argmax(values))
    detected = values[best] > eta
    return Decision(detected, best + 1 if detected else 0, values[best])
