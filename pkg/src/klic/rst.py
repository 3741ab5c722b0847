"""Window hypotheses and the GLR for range-spread targets of unknown extent.

Each alternative hypothesis is a contiguous run of bins ``(start, size)``
inside a window of ``L`` range bins. Hypotheses are numbered size-major, then
by ascending start: the ``L`` single bins come first, then the ``L - 1``
pairs, and so on. For ``L = 10`` the pair ``{4, 5}`` is hypothesis 14.

The GLR for hypothesis ``m`` is

    (L + K) [log det S0 - log det(sum_{l in m} r_l r_l^H + S1)]

with ``S0`` the Gram of window plus training, ``S1`` the Gram of training and
the window bins outside ``m``, and ``r_l`` the bin-``l`` snapshot with its
``S1``-whitened projection on ``v`` removed. The implementation whitens by
``S0`` once per trial, after which every hypothesis reduces to determinants
of at most ``(L + 1) x (L + 1)`` matrices built from one small Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detector import HypothesisScore, penalty_vector
from .errors import InvalidInputError, SingularMatrixError
from .linalg import ctranspose, gram


@dataclass(frozen=True)
class WindowHypothesis:
    index: int
    start: int
    size: int

    @property
    def bins(self):
        return tuple(range(self.start, self.start + self.size))


def enumerate_windows(l):
    if l < 1:
        raise InvalidInputError(f"window length must be >= 1, got {l}")
    out = []
    for size in range(1, l + 1):
        for start in range(1, l - size + 2):
            out.append(WindowHypothesis(len(out) + 1, start, size))
    return out


def rst_param_count(window_size, n):
    if window_size < 1:
        raise InvalidInputError(f"window size must be >= 1, got {window_size}")
    return 2 * window_size + 1 + n * n


def rst_penalties(rule, n, k, l):
    counts = [rst_param_count(w.size, n) for w in enumerate_windows(l)]
    return penalty_vector(rule, counts, t=2 * (l + k) * n, k=k)


def _chol(a, what):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"{what} is not positive definite") from exc


def _logdet(a, what):
    low = _chol(a, what)
    return 2.0 * np.sum(np.log(np.real(np.diagonal(low, axis1=-2, axis2=-1))), axis=-1)


def rst_glr_all(window, s, v, k):
    """GLR log-statistics for every contiguous-bin hypothesis.

    Parameters
    ----------
    window : array_like, shape (..., N, L)
        Snapshots of the window under test.
    s : array_like, shape (..., N, N)
        Training Gram matrix from ``k`` snapshots.
    v : array_like, shape (N,)
        Target steering vector.
    k : int
        Number of training snapshots.

    Returns
    -------
    ndarray, shape (..., L (L + 1) / 2)
        Ordered as :func:`enumerate_windows`.
    """
    window = np.asarray(window, dtype=complex)
    s = np.asarray(s, dtype=complex)
    v = np.asarray(v, dtype=complex).reshape(-1)
    n, l = window.shape[-2:]
    if s.shape[-2:] != (n, n) or v.size != n:
        raise InvalidInputError("dimension mismatch among window, S and v")
    if not np.all(np.isfinite(window)) or not np.all(np.isfinite(s)):
        raise InvalidInputError("non-finite input")
    _chol(s, "training Gram matrix S")
    batch = np.broadcast_shapes(window.shape[:-2], s.shape[:-2])
    window = np.broadcast_to(window, (*batch, n, l))
    s0 = gram(window) + s
    low = _chol(s0, "S0")
    rhs = np.concatenate([window, np.broadcast_to(v[:, None], (*batch, n, 1))], axis=-1)
    x = np.linalg.solve(low, rhs)
    g = ctranspose(x) @ x  # (..., L+1, L+1); index L is the whitened steering vector
    g = 0.5 * (g + ctranspose(g))
    c = np.real(g[..., l, l])

    out = np.empty((*batch, l * (l + 1) // 2))
    col = 0
    for size in range(1, l + 1):
        starts = np.arange(l - size + 1)
        sel = starts[:, None] + np.arange(size)[None, :]  # (n_starts, size)
        idx = np.concatenate([sel, np.full((len(starts), 1), l)], axis=1)
        gx = g[..., idx[:, :, None], idx[:, None, :]]  # (..., n_starts, size+1, size+1)
        gss = gx[..., :size, :size]
        eye = np.eye(size)
        a = eye - gss
        # the last column of W_s^H X is h = W_s^H u, so one solve serves both uses
        a_inv_x = np.linalg.solve(a, gx[..., :size, :])
        a_inv_h = a_inv_x[..., size:]
        b = c[..., None] + np.real(np.sum(gx[..., :size, size].conj() * a_inv_h[..., 0], axis=-1))
        # R = [W_s, u] C with C = [I; -a_row / b], a_row = (A^-1 h)^H
        cmat = np.concatenate([np.broadcast_to(eye, gss.shape), -ctranspose(a_inv_h) / b[..., None, None]], axis=-2)
        # X^H S1^-1 X = X^H X + X^H W_s A^-1 W_s^H X
        inner = gx + ctranspose(gx[..., :size, :]) @ a_inv_x
        core = eye + ctranspose(cmat) @ inner @ cmat
        core = 0.5 * (core + ctranspose(core))
        logdet = _logdet(0.5 * (a + ctranspose(a)), "S1") + _logdet(core, "S1 + R R^H")
        out[..., col:col + len(starts)] = -(l + k) * logdet
        col += len(starts)
    return out


def rst_glr(window, training, v, hypothesis):
    """GLR for a single :class:`WindowHypothesis` given raw training snapshots."""
    training = np.asarray(training)
    lam = rst_glr_all(window, gram(training), v, training.shape[-1])
    return lam[..., hypothesis.index - 1]


def rst_scores(window, training, v, rule):
    window = np.asarray(window)
    training = np.asarray(training)
    n, l = window.shape
    k = training.shape[1]
    if k < n:
        raise InvalidInputError(f"need K >= N training snapshots, got K={k}, N={n}")
    lam = rst_glr_all(window, gram(training), v, k)
    h = rst_penalties(rule, n, k, l)
    return [
        HypothesisScore(w.index, float(lam[w.index - 1]), rst_param_count(w.size, n), float(h[w.index - 1]))
        for w in enumerate_windows(l)
    ]


def rst_statistics(data, v, l):
    """Batched GLRs from ``(trials, N, L + K)`` data, window columns first."""
    k = data.shape[-1] - l
    return rst_glr_all(data[..., :l], gram(data[..., l:]), v, k)


def window_geometry(m_hat, l):
    """``(start, size)`` arrays for 1-based hypothesis indices; zeros where ``m_hat == 0``."""
    windows = enumerate_windows(l)
    table = np.array([(0, 0)] + [(w.start, w.size) for w in windows])
    m_hat = np.asarray(m_hat)
    return table[m_hat, 0], table[m_hat, 1]
