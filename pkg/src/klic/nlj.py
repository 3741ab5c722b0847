"""GLR statistic and parameter counts for multiple noise-like jammer detection.

Under hypothesis ``m`` the data covariance is ``sigma^2 I`` plus a rank-``m``
PSD jammer term; under the null it is ``sigma^2 I``. The GLR depends on the
data only through the eigenvalues ``g_1 >= ... >= g_N`` of ``Z Z^H``.
"""

from __future__ import annotations

import numpy as np

from .detector import HypothesisScore, penalty_vector
from .errors import DegenerateInputError, InvalidInputError
from .linalg import gram, hermitian_eigvals


def _prepare(gammas, k):
    g = np.asarray(gammas, dtype=float)
    if g.ndim < 1 or g.shape[-1] < 2:
        raise InvalidInputError("need at least two eigenvalues")
    if k < 1:
        raise InvalidInputError(f"K must be >= 1, got {k}")
    if np.any(np.diff(g, axis=-1) > 1e-12 * np.max(np.abs(g), initial=1.0)):
        raise InvalidInputError("eigenvalues must be sorted in descending order")
    top = np.max(g, axis=-1, keepdims=True)
    if np.any(g < -1e-10 * top):
        raise InvalidInputError("eigenvalues must be nonnegative")
    g = np.clip(g, 0.0, None)
    total = g.sum(axis=-1)
    if np.any(total <= 0):
        raise DegenerateInputError("all eigenvalues are zero")
    return g, total


def nlj_glr_all(gammas, k, n_j):
    """GLR log-statistics for every order ``m = 1..n_j``.

    Parameters
    ----------
    gammas : array_like, shape (..., N)
        Descending eigenvalues of ``Z Z^H``.
    k : int
        Number of snapshots.
    n_j : int
        Largest order to evaluate; must be ``< N``.

    Returns
    -------
    ndarray, shape (..., n_j)
    """
    g, total = _prepare(gammas, k)
    n = g.shape[-1]
    if not 1 <= n_j < n:
        raise InvalidInputError(f"orders must satisfy 1 <= m < N={n}, got n_j={n_j}")
    grand = total / (n * k)
    # normalize by the grand mean first: exact scale invariance up to rounding
    r = g / grand[..., None]
    m = np.arange(1, n_j + 1)
    head = r[..., :n_j]
    if np.any(head <= 0):
        raise DegenerateInputError("zero eigenvalue among the jammer subspace")
    tail = r.sum(axis=-1, keepdims=True) - np.cumsum(head, axis=-1)
    # tail <= 0 (rank-deficient Gram) would make the statistic infinite
    if np.any(tail <= 0):
        raise DegenerateInputError("noise-subspace eigenvalues are all zero")
    tail_mean = tail / (k * (n - m))
    log_head = np.cumsum(np.log(head / k), axis=-1)
    return -k * (n - m) * np.log(tail_mean) - k * log_head


def nlj_glr(gammas, k, m):
    """GLR log-statistic for a single order ``m``."""
    return nlj_glr_all(gammas, k, m)[..., m - 1]


def nlj_param_count(m, n):
    """Real unknowns under order ``m``: the rank-``m`` jammer term plus the noise power."""
    if not 1 <= m <= n:
        raise InvalidInputError(f"need 1 <= m <= N, got m={m}, N={n}")
    return m * (2 * n - m) + 1


def nlj_penalties(rule, n, k, n_j):
    counts = [nlj_param_count(m, n) for m in range(1, n_j + 1)]
    return penalty_vector(rule, counts, t=2 * k * n, k=k)


def nlj_scores(z, rule, n_j):
    """Per-hypothesis scores for one ``(N, K)`` data matrix."""
    z = np.asarray(z)
    n, k = z.shape
    lam = nlj_glr_all(hermitian_eigvals(gram(z)), k, n_j)
    h = nlj_penalties(rule, n, k, n_j)
    return [
        HypothesisScore(m, float(lam[m - 1]), nlj_param_count(m, n), float(h[m - 1]))
        for m in range(1, n_j + 1)
    ]


def nlj_statistics(data, n_j):
    """Batched GLRs: ``data`` is ``(trials, N, K)``, result ``(trials, n_j)``."""
    k = data.shape[-1]
    return nlj_glr_all(np.linalg.eigvalsh(gram(data))[..., ::-1], k, n_j)
