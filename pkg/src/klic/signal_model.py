"""Steering vectors, interference covariances and per-scenario data samplers.

Three scenarios are modelled:

* :class:`NljScenario` -- ``K`` snapshots with an unknown number of noise-like
  jammers, no clutter.
* :class:`CjScenario` -- one cell under test that may hold a target and/or a
  coherent jammer, plus ``K`` clutter-plus-noise training snapshots.
* :class:`RstScenario` -- a window of ``L`` range bins with a target spread
  over contiguous bins, plus ``K`` training snapshots.

All scenarios produce a data matrix whose columns are snapshots. The column
layout is ``[cut | training]`` for CJ and ``[window (L) | training (K)]`` for
RST. Power ratios are linear here; dB conversion lives in the CLI layer only.

Per-trial randomness (white noise and signal phases) is drawn from one
generator in a fixed order that does not depend on the hypothesis, so the same
stream under different hypotheses gives common random numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .linalg import (
    SeededRng,
    as_generator,
    chol_solve,
    covariance_factor,
    standard_cn,
)
from .rst import enumerate_windows

DIAGONAL = "diagonal"
ALL_ENTRIES = "all-entries"
NOISE_PLACEMENTS = (DIAGONAL, ALL_ENTRIES)


def steering_vector(n, theta):
    """Unit-norm ULA steering vector, entry ``k`` equal to ``exp(j pi k sin(theta)) / sqrt(n)``."""
    if n < 2:
        raise InvalidInputError(f"N must be >= 2, got {n}")
    if not abs(theta) < np.pi / 2:
        raise InvalidInputError(f"|theta| must be < pi/2, got {theta}")
    k = np.arange(n)
    return np.exp(1j * np.pi * k * np.sin(theta)) / np.sqrt(n)


def steering_matrix(n, thetas):
    """Columns ``v(theta_i)`` stacked into an ``(n, len(thetas))`` matrix."""
    return np.stack([steering_vector(n, t) for t in thetas], axis=1)


@dataclass(frozen=True)
class ClutterModel:
    """Exponentially correlated clutter plus white noise.

    ``noise_placement="diagonal"`` gives ``sigma_n2 I + sigma_c2 [rho^|n-m|]``;
    ``"all-entries"`` adds ``sigma_n2`` to every entry, the literal reading of
    the exponential-covariance model.
    """

    sigma_n2: float = 1.0
    sigma_c2: float = 100.0
    rho_c: float = 0.95
    noise_placement: str = DIAGONAL

    def __post_init__(self):
        if not self.sigma_n2 > 0:
            raise InvalidConfigError("sigma_n2", "must be > 0")
        if not self.sigma_c2 >= 0:
            raise InvalidConfigError("sigma_c2", "must be >= 0")
        if not 0 <= self.rho_c < 1:
            raise InvalidConfigError("rho_c", "must lie in [0, 1)")
        if self.noise_placement not in NOISE_PLACEMENTS:
            raise InvalidConfigError("noise_placement", f"must be one of {NOISE_PLACEMENTS}")


def clutter_covariance(model, n):
    lag = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    clutter = model.sigma_c2 * model.rho_c ** lag
    if model.noise_placement == DIAGONAL:
        cov = model.sigma_n2 * np.eye(n) + clutter
    else:
        cov = model.sigma_n2 + clutter
    return cov.astype(complex)


def _check_angles(angles, key):
    for a in angles:
        if not abs(a) < np.pi / 2:
            raise InvalidConfigError(key, f"angle {a} rad outside (-pi/2, pi/2)")


def _check_hypothesis(hypothesis, count):
    if not (isinstance(hypothesis, (int, np.integer)) and 0 <= hypothesis <= count):
        raise InvalidInputError(f"hypothesis index must be in 0..{count}, got {hypothesis!r}")


class _Sampler:
    """Shared batch machinery: draw per trial, assemble in one vectorized pass."""

    def _draw(self, gen):
        raise NotImplementedError

    def _assemble(self, white, extra, hypothesis):
        raise NotImplementedError

    def _n_hypotheses(self):
        raise NotImplementedError

    def sample(self, hypothesis, rng):
        """One data matrix under ``hypothesis`` (0 is the null)."""
        _check_hypothesis(hypothesis, self._n_hypotheses())
        white, extra = self._draw(as_generator(rng))
        return self._assemble(white[None], extra[None], hypothesis)[0]

    def sample_batch(self, hypothesis, seed, trials):
        """Data matrices for the given trial indices, trial ``t`` on stream ``(seed, t)``.

        Row ``i`` holds the draw of ``sample(hypothesis, SeededRng(seed, trials[i]))``;
        values agree to rounding (batched products are not bit-stable across
        batch sizes).
        """
        _check_hypothesis(hypothesis, self._n_hypotheses())
        draws = [self._draw(SeededRng(seed, int(t)).generator()) for t in trials]
        white = np.stack([d[0] for d in draws])
        extra = np.stack([d[1] for d in draws])
        return self._assemble(white, extra, hypothesis)


@dataclass
class NljScenario(_Sampler):
    """Noise-like jammers of common power; hypothesis ``m`` switches on the first ``m``."""

    jammer_angles: tuple = tuple(np.deg2rad([10.0, 20.0, -15.0]))
    jnr: float = 10.0
    n_j: int = 6
    n: int = 16
    k: int = 32
    sigma_n2: float = 1.0

    def __post_init__(self):
        self.jammer_angles = tuple(float(a) for a in self.jammer_angles)
        _check_angles(self.jammer_angles, "jammer_angles")
        if self.n < 2:
            raise InvalidConfigError("n", "must be >= 2")
        if not len(self.jammer_angles) <= self.n_j <= self.n:
            raise InvalidConfigError("n_j", "need len(jammer_angles) <= n_j <= n")
        if not self.jnr >= 0:
            raise InvalidConfigError("jnr", "must be >= 0")
        if not self.sigma_n2 > 0:
            raise InvalidConfigError("sigma_n2", "must be > 0")
        if self.k < 1:
            raise InvalidConfigError("k", "must be >= 1")

    @property
    def n_hypotheses(self):
        return self.n_j

    @property
    def n_columns(self):
        return self.k

    def _n_hypotheses(self):
        return len(self.jammer_angles)

    def covariance(self, hypothesis):
        return nlj_covariance(self.n, self.jammer_angles[:hypothesis], self.jnr, self.sigma_n2)

    @cached_property
    def _factors(self):
        return [covariance_factor(self.covariance(m)) for m in range(len(self.jammer_angles) + 1)]

    def _draw(self, gen):
        return standard_cn(gen, (self.n, self.k)), np.zeros(0)

    def _assemble(self, white, extra, hypothesis):
        return self._factors[hypothesis] @ white


def nlj_covariance(n, jammer_angles, jnr, sigma_n2=1.0):
    """``sigma_n2 I + jnr sigma_n2 sum_i v(theta_i) v(theta_i)^H``."""
    cov = sigma_n2 * np.eye(n, dtype=complex)
    for theta in jammer_angles:
        v = steering_vector(n, theta)
        cov += jnr * sigma_n2 * np.outer(v, v.conj())
    return cov


@dataclass
class CjScenario(_Sampler):
    """Target versus coherent jammer in a known subspace.

    Hypotheses: 0 noise only, 1 jammer, 2 target, 3 target and jammer. The
    jammer signature is ``beta v(jammer_angle)`` scaled so that its whitened
    power equals ``jcnr``; the target amplitude is scaled so that
    ``|alpha|^2 v^H M^-1 v = snr``.
    """

    target_angle: float = 0.0
    subspace_angles: tuple = tuple(np.deg2rad([35.0, 40.0, 45.0]))
    jammer_angle: float = float(np.deg2rad(40.0))
    snr: float = 100.0
    jcnr: float = 100.0
    cnr: float = 100.0
    rho_c: float = 0.95
    n: int = 16
    k: int = 32
    sigma_n2: float = 1.0
    noise_placement: str = DIAGONAL
    true_hypothesis: int = 3

    def __post_init__(self):
        self.subspace_angles = tuple(float(a) for a in self.subspace_angles)
        _check_angles((self.target_angle, self.jammer_angle, *self.subspace_angles), "angles")
        if self.k < self.n:
            raise InvalidConfigError("k", "training size must satisfy K >= N")
        for key in ("snr", "jcnr", "cnr"):
            if not getattr(self, key) >= 0:
                raise InvalidConfigError(key, "must be >= 0")
        if self.true_hypothesis not in (0, 1, 2, 3):
            raise InvalidConfigError("true_hypothesis", "must be in {0, 1, 2, 3}")
        basis = np.column_stack([self.v, self.J])
        if np.linalg.matrix_rank(basis) < basis.shape[1]:
            raise InvalidConfigError("subspace_angles", "jammer subspace must be independent of v")

    n_hypotheses = 3

    @property
    def n_columns(self):
        return self.k + 1

    def _n_hypotheses(self):
        return 3

    @cached_property
    def clutter(self):
        return ClutterModel(self.sigma_n2, self.cnr * self.sigma_n2, self.rho_c, self.noise_placement)

    @cached_property
    def covariance(self):
        return clutter_covariance(self.clutter, self.n)

    @cached_property
    def _factor(self):
        return covariance_factor(self.covariance)

    @cached_property
    def v(self):
        return steering_vector(self.n, self.target_angle)

    @cached_property
    def J(self):
        return steering_matrix(self.n, self.subspace_angles)

    def _whitened_power(self, u):
        return float(np.real(np.vdot(u, chol_solve(self.covariance, u))))

    @cached_property
    def target_amplitude(self):
        return np.sqrt(self.snr / self._whitened_power(self.v))

    @cached_property
    def jammer_signature(self):
        """``q`` with zero phase; ``q^H M^-1 q = jcnr``."""
        vj = steering_vector(self.n, self.jammer_angle)
        return np.sqrt(self.jcnr / self._whitened_power(vj)) * vj

    def _draw(self, gen):
        white = standard_cn(gen, (self.n, self.k + 1))
        return white, gen.uniform(0.0, 2 * np.pi, size=2)

    def _assemble(self, white, extra, hypothesis):
        data = self._factor @ white
        if hypothesis in (2, 3):
            alpha = self.target_amplitude * np.exp(1j * extra[:, 0])
            data[:, :, 0] += alpha[:, None] * self.v
        if hypothesis in (1, 3):
            phase = np.exp(1j * extra[:, 1])
            data[:, :, 0] += phase[:, None] * self.jammer_signature
        return data


@dataclass
class RstScenario(_Sampler):
    """Range-spread target over contiguous bins of an ``L``-bin window.

    Hypothesis ``m >= 1`` places the target on the ``m``-th window of
    :func:`klic.rst.enumerate_windows`; the configured ``occupied_bins`` fix
    the true index. Occupied bins share one amplitude magnitude with
    independent uniform phases, scaled so that
    ``sum |alpha_l|^2 v^H M^-1 v = sinr``.
    """

    occupied_bins: tuple = (4, 5)
    l: int = 10
    sinr: float = 100.0
    cnr: float = 100.0
    rho_c: float = 0.95
    target_angle: float = 0.0
    n: int = 16
    k: int = 32
    sigma_n2: float = 1.0
    noise_placement: str = DIAGONAL
    windows: list = field(init=False, repr=False)

    def __post_init__(self):
        self.occupied_bins = tuple(int(b) for b in self.occupied_bins)
        bins = self.occupied_bins
        if not bins or min(bins) < 1 or max(bins) > self.l:
            raise InvalidConfigError("occupied_bins", f"must be a nonempty subset of 1..{self.l}")
        if list(bins) != list(range(bins[0], bins[0] + len(bins))):
            raise InvalidConfigError("occupied_bins", "must be contiguous and ascending")
        if self.k < self.n:
            raise InvalidConfigError("k", "training size must satisfy K >= N")
        _check_angles((self.target_angle,), "target_angle")
        for key in ("sinr", "cnr"):
            if not getattr(self, key) >= 0:
                raise InvalidConfigError(key, "must be >= 0")
        self.windows = enumerate_windows(self.l)

    @property
    def n_hypotheses(self):
        return len(self.windows)

    @property
    def n_columns(self):
        return self.l + self.k

    @property
    def true_hypothesis(self):
        start, size = self.occupied_bins[0], len(self.occupied_bins)
        for w in self.windows:
            if (w.start, w.size) == (start, size):
                return w.index
        raise AssertionError("occupied bins not enumerated")

    def _n_hypotheses(self):
        return len(self.windows)

    @cached_property
    def clutter(self):
        return ClutterModel(self.sigma_n2, self.cnr * self.sigma_n2, self.rho_c, self.noise_placement)

    @cached_property
    def covariance(self):
        return clutter_covariance(self.clutter, self.n)

    @cached_property
    def _factor(self):
        return covariance_factor(self.covariance)

    @cached_property
    def v(self):
        return steering_vector(self.n, self.target_angle)

    def amplitude(self, size):
        """Per-bin amplitude magnitude for a target spanning ``size`` bins."""
        power = float(np.real(np.vdot(self.v, chol_solve(self.covariance, self.v))))
        return np.sqrt(self.sinr / (size * power))

    def _draw(self, gen):
        white = standard_cn(gen, (self.n, self.l + self.k))
        return white, gen.uniform(0.0, 2 * np.pi, size=self.l)

    def _assemble(self, white, extra, hypothesis):
        data = self._factor @ white
        if hypothesis:
            w = self.windows[hypothesis - 1]
            cols = np.arange(w.start - 1, w.start - 1 + w.size)
            alpha = self.amplitude(w.size) * np.exp(1j * extra[:, cols])
            data[:, :, cols] += alpha[:, None, :] * self.v[None, :, None]
        return data


def sample_under_hypothesis(scenario, hypothesis_index, rng):
    """Draw one data matrix from any scenario under the given hypothesis."""
    return scenario.sample(hypothesis_index, rng)

