"""Complex Hermitian linear algebra and reproducible complex-Gaussian sampling.

Every function accepts plain ``numpy`` arrays. Matrices are ``(N, N)`` complex
arrays; most helpers also accept a leading batch axis ``(..., N, N)`` so the
Monte Carlo engine can push thousands of trials through one call.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SingularMatrixError

HERMITIAN_ATOL = 1e-12
PSD_RTOL = 1e-10


def _check_finite(a, name="matrix"):
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")


def _check_square(a, name="matrix"):
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")


def ctranspose(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a):
    """Return ``(A + A^H) / 2``; removes round-off asymmetry of Gram matrices."""
    a = np.asarray(a)
    return 0.5 * (a + ctranspose(a))


def gram(z):
    """``Z Z^H`` for a data matrix whose columns are snapshots."""
    z = np.asarray(z)
    return hermitian_part(z @ ctranspose(z))


def check_hermitian(a, name="matrix"):
    """Validate finiteness and Hermitian symmetry, returning a complex array.

    The symmetry tolerance is ``1e-12`` absolute, scaled up for matrices whose
    entries exceed unity so that large Gram matrices are not rejected for
    round-off.
    """
    a = np.asarray(a, dtype=complex)
    _check_square(a, name)
    _check_finite(a, name)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - ctranspose(a)), initial=0.0) > HERMITIAN_ATOL * scale:
        raise InvalidInputError(f"{name} is not Hermitian")
    return a


def hermitian_eig(a):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns
    -------
    eigenvalues : ndarray, shape (..., N)
        Real eigenvalues sorted so that ``g[0] >= g[1] >= ...``.
    eigenvectors : ndarray, shape (..., N, N)
        Unitary matrix whose columns are the matching eigenvectors, so that
        ``A = V diag(g) V^H``.
    """
    a = check_hermitian(a)
    w, v = np.linalg.eigh(a)
    return w[..., ::-1], v[..., ::-1]


def hermitian_eigvals(a):
    """Descending eigenvalues only; cheaper than :func:`hermitian_eig`."""
    a = check_hermitian(a)
    return np.linalg.eigvalsh(a)[..., ::-1]


def cholesky(a):
    """Lower Cholesky factor, raising :class:`SingularMatrixError` if not PD."""
    a = np.asarray(a, dtype=complex)
    _check_square(a)
    _check_finite(a)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("matrix is not positive definite") from exc


def chol_solve(a, b):
    """Solve ``A X = B`` for positive definite ``A`` via its Cholesky factor."""
    low = cholesky(a)
    b = np.asarray(b, dtype=complex)
    vector = b.ndim == low.ndim - 1
    if vector:
        b = b[..., None]
    if b.shape[-2] != low.shape[-1]:
        raise InvalidInputError(f"dimension mismatch: {low.shape} vs {b.shape}")
    y = np.linalg.solve(low, b)
    x = np.linalg.solve(ctranspose(low), y)
    return x[..., 0] if vector else x


def logdet_pd(a):
    """``log det A`` for positive definite ``A`` as ``2 sum log diag(chol(A))``."""
    low = cholesky(a)
    return 2.0 * np.sum(np.log(np.real(np.diagonal(low, axis1=-2, axis2=-1))), axis=-1)


def inv_sqrt(a):
    """Hermitian inverse square root ``A^{-1/2}`` of a positive definite matrix."""
    g, v = hermitian_eig(a)
    if np.any(g <= 0):
        raise SingularMatrixError("matrix is not positive definite")
    return (v * (1.0 / np.sqrt(g))[..., None, :]) @ ctranspose(v)


def psd_sqrt(a):
    """Hermitian square root of a PSD matrix.

    Eigenvalues in ``[-1e-10 * g_max, 0)`` are treated as round-off and clamped
    to zero; anything more negative is rejected.
    """
    g, v = hermitian_eig(a)
    top = np.max(np.abs(g), axis=-1, keepdims=True)
    if np.any(g < -PSD_RTOL * top):
        raise InvalidInputError("matrix is not positive semidefinite")
    g = np.clip(g, 0.0, None)
    return (v * np.sqrt(g)[..., None, :]) @ ctranspose(v)


def covariance_factor(cov):
    """A factor ``C`` with ``C C^H = cov``: Cholesky when PD, else PSD square root."""
    cov = check_hermitian(cov, "covariance")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return psd_sqrt(cov)


def derive_seed(seed, *tags):
    """Deterministically derive a 64-bit seed from ``seed`` and integer/str tags."""
    keys = []
    for tag in tags:
        if isinstance(tag, str):
            tag = zlib.crc32(tag.encode())
        keys.append(int(tag))
    state = np.random.SeedSequence(int(seed), spawn_key=tuple(keys)).generate_state(1, np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class SeededRng:
    """Counter-based random stream addressed by ``(base_seed, stream_index)``.

    Streams are Philox generators keyed by ``base_seed`` whose counter starts at
    ``stream_index * 2**192``; distinct indices can never overlap.
    """

    base_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.base_seed < 2**64 or not 0 <= self.stream_index < 2**64:
            raise InvalidInputError("seed and stream index must be 64-bit unsigned integers")

    def generator(self):
        bitgen = np.random.Philox(key=self.base_seed, counter=[0, 0, 0, self.stream_index])
        return np.random.Generator(bitgen)


def as_generator(rng):
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidInputError(f"expected SeededRng or numpy Generator, got {type(rng).__name__}")


def standard_cn(gen, shape):
    """I.i.d. circular CN(0, 1) draws: real and imaginary parts N(0, 1/2)."""
    w = gen.standard_normal((2, *shape))
    return (w[0] + 1j * w[1]) * np.sqrt(0.5)


def sample_cn(mean, cov, rng, n=None):
    """Draw from CN(mean, cov) as ``mean + C w``.

    With ``n`` given, returns an ``(N, n)`` matrix of i.i.d. columns.
    """
    mean = np.asarray(mean, dtype=complex)
    cov = np.asarray(cov, dtype=complex)
    if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
        raise InvalidInputError(f"dimension mismatch: mean {mean.shape}, cov {cov.shape}")
    factor = covariance_factor(cov)
    gen = as_generator(rng)
    if n is None:
        return mean + factor @ standard_cn(gen, (mean.size,))
    return mean[:, None] + factor @ standard_cn(gen, (mean.size, n))
