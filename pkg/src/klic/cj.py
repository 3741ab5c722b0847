"""GLR statistics for target detection against a coherent jammer.

Hypotheses for the cell under test ``z`` (training Gram ``S`` from ``K``
signal-free snapshots):

1. jammer only, ``z = J a + n``
2. target only, ``z = alpha v + n``
3. target and jammer

After whitening by ``S``, each GLR compares ``1 + |z_w|^2`` with one plus the
energy of ``z_w`` left outside the whitened signal subspace of the hypothesis
(``J``, ``v`` or ``[v, J]``). Any square root of ``S^{-1}`` gives the same
values; the Cholesky factor is used here.
"""

from __future__ import annotations

import numpy as np

from .detector import HypothesisScore, penalty_vector
from .errors import InvalidInputError, RankDeficiencyError, SingularMatrixError
from .linalg import ctranspose, gram

RANK_RTOL = 1e-10


def _whiten(s, rhs):
    try:
        low = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("training Gram matrix S is not positive definite") from exc
    return np.linalg.solve(low, rhs)


def _residual_energy(basis, y, y_energy):
    """``|P_perp y|^2`` for the column span of ``basis`` (batched QR)."""
    q, r = np.linalg.qr(basis)
    diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
    norms = np.linalg.norm(basis, axis=-2)
    if np.any(diag <= RANK_RTOL * norms):
        raise RankDeficiencyError("whitened signal subspace is rank deficient")
    coeff = ctranspose(q) @ y
    return y_energy - np.sum(np.abs(coeff[..., 0]) ** 2, axis=-1)


def cj_glr_all(z, s, v, J, k):
    """All three GLR log-statistics.

    Parameters
    ----------
    z : array_like, shape (..., N)
        Cell under test.
    s : array_like, shape (..., N, N)
        Training Gram matrix ``sum_k z_k z_k^H``.
    v : array_like, shape (N,)
        Target steering vector.
    J : array_like, shape (N, q)
        Jammer subspace basis.
    k : int
        Number of training snapshots in ``s``.

    Returns
    -------
    ndarray, shape (..., 3)
        Columns for hypotheses 1, 2, 3.
    """
    z = np.asarray(z, dtype=complex)
    s = np.asarray(s, dtype=complex)
    v = np.asarray(v, dtype=complex).reshape(-1)
    J = np.asarray(J, dtype=complex)
    if J.ndim == 1:
        J = J[:, None]
    n = v.size
    if z.shape[-1] != n or s.shape[-2:] != (n, n) or J.shape[0] != n:
        raise InvalidInputError("dimension mismatch among z, S, v, J")
    if not np.all(np.isfinite(z)) or not np.all(np.isfinite(s)):
        raise InvalidInputError("non-finite input")
    q = J.shape[1]
    batch = np.broadcast_shapes(z.shape[:-1], s.shape[:-2])
    rhs = np.concatenate(
        [
            np.broadcast_to(z[..., :, None], (*batch, n, 1)),
            np.broadcast_to(v[:, None], (*batch, n, 1)),
            np.broadcast_to(J, (*batch, n, q)),
        ],
        axis=-1,
    )
    w = _whiten(np.broadcast_to(s, (*batch, n, n)), rhs)
    zw, vw, jw = w[..., :1], w[..., 1:2], w[..., 2:]
    energy = np.sum(np.abs(zw[..., 0]) ** 2, axis=-1)
    resid = np.stack(
        [
            _residual_energy(jw, zw, energy),
            _residual_energy(vw, zw, energy),
            _residual_energy(w[..., 1:], zw, energy),
        ],
        axis=-1,
    )
    resid = np.clip(resid, 0.0, None)
    return (k + 1) * (np.log1p(energy)[..., None] - np.log1p(resid))


def cj_glr(z, s, v, J, k, m):
    if m not in (1, 2, 3):
        raise InvalidInputError(f"hypothesis must be 1, 2 or 3, got {m}")
    return cj_glr_all(z, s, v, J, k)[..., m - 1]


def cj_param_counts(q, n):
    """Real unknowns under hypotheses 1, 2, 3 (ICM entries included)."""
    if q < 1:
        raise InvalidInputError(f"jammer subspace dimension must be >= 1, got {q}")
    return (2 * q + n * n, 2 + n * n, 2 + 2 * q + n * n)


def cj_penalties(rule, n, k, q):
    return penalty_vector(rule, cj_param_counts(q, n), t=2 * (k + 1) * n, k=k)


def cj_scores(z, training, v, J, rule):
    training = np.asarray(training)
    n, k = training.shape
    if k < n:
        raise InvalidInputError(f"need K >= N training snapshots, got K={k}, N={n}")
    J = np.atleast_2d(np.asarray(J))
    if J.shape[0] != n:
        J = J.T
    lam = cj_glr_all(z, gram(training), v, J, k)
    q = J.shape[1]
    counts = cj_param_counts(q, n)
    h = cj_penalties(rule, n, k, q)
    return [HypothesisScore(m, float(lam[m - 1]), counts[m - 1], float(h[m - 1])) for m in (1, 2, 3)]


def cj_statistics(data, v, J):
    """Batched GLRs from ``(trials, N, 1 + K)`` data, column 0 the cell under test."""
    k = data.shape[-1] - 1
    return cj_glr_all(data[..., 0], gram(data[..., 1:]), v, J, k)
