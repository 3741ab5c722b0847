"""Monte Carlo engine: threshold calibration, detection/classification rates, CFAR checks.

Trial ``t`` of a run always draws from the counter-based stream
``SeededRng(seed, t)``. Trials are processed in fixed-size chunks that may be
spread over worker threads (``KLIC_THREADS`` caps the count); chunk results are
merged by trial index, so every output is independent of the schedule.

Seeds for the different phases of an experiment are derived from the
experiment seed with :func:`klic.linalg.derive_seed`:

* calibration under the null uses ``derive_seed(seed, "h0")``;
* data under alternative ``n`` use ``derive_seed(seed, "h", n)`` at every
  sweep point (common random numbers along a sweep).
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cj, nlj, rst
from .detector import Decision, HypothesisScore, decision_statistic
from .errors import InsufficientTrialsError, InvalidInputError, KlicError, TrialFailure
from .linalg import derive_seed
from .signal_model import CjScenario, NljScenario, RstScenario

CHUNK = 2048
Z95 = 1.959963984540054


def default_workers():
    """Worker threads: ``KLIC_THREADS`` if set to an integer, else the CPU count."""
    env = os.environ.get("KLIC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            warnings.warn(f"ignoring non-integer KLIC_THREADS={env!r}", stacklevel=2)
    return os.cpu_count() or 1


# -- scenario dispatch --------------------------------------------------------


def glr_batch(scenario, data):
    """GLR log-statistics ``(trials, M)`` for a batch of data matrices."""
    if isinstance(scenario, NljScenario):
        return nlj.nlj_statistics(data, scenario.n_j)
    if isinstance(scenario, CjScenario):
        return cj.cj_statistics(data, scenario.v, scenario.J)
    if isinstance(scenario, RstScenario):
        return rst.rst_statistics(data, scenario.v, scenario.l)
    raise InvalidInputError(f"unknown scenario type {type(scenario).__name__}")


def penalties_for(scenario, rule):
    if isinstance(scenario, NljScenario):
        return nlj.nlj_penalties(rule, scenario.n, scenario.k, scenario.n_j)
    if isinstance(scenario, CjScenario):
        return cj.cj_penalties(rule, scenario.n, scenario.k, len(scenario.subspace_angles))
    if isinstance(scenario, RstScenario):
        return rst.rst_penalties(rule, scenario.n, scenario.k, scenario.l)
    raise InvalidInputError(f"unknown scenario type {type(scenario).__name__}")


def param_counts_for(scenario):
    if isinstance(scenario, NljScenario):
        return [nlj.nlj_param_count(m, scenario.n) for m in range(1, scenario.n_j + 1)]
    if isinstance(scenario, CjScenario):
        return list(cj.cj_param_counts(len(scenario.subspace_angles), scenario.n))
    if isinstance(scenario, RstScenario):
        return [rst.rst_param_count(w.size, scenario.n) for w in scenario.windows]
    raise InvalidInputError(f"unknown scenario type {type(scenario).__name__}")


@dataclass(frozen=True)
class Detector:
    """A penalty rule applied one-stage (penalized maximum) or two-stage."""

    rule: object
    two_stage: bool = False

    @property
    def label(self):
        return self.rule.label + ("-ts" if self.two_stage else "")

    def evaluate(self, lam, h):
        return decision_statistic(lam, h, self.two_stage)


# -- simulation ---------------------------------------------------------------


def _chunks(trials):
    return [np.arange(a, min(a + CHUNK, trials)) for a in range(0, trials, CHUNK)]


def _locate_failure(scenario, hypothesis, seed, idx, exc):
    for t in idx:
        try:
            glr_batch(scenario, scenario.sample_batch(hypothesis, seed, [t]))
        except KlicError as inner:
            return TrialFailure(int(t), seed, hypothesis, inner)
    return TrialFailure(int(idx[0]), seed, hypothesis, exc)


def simulate_glr(scenario, hypothesis, trials, seed, workers=None):
    """GLR statistics of ``trials`` independent data draws under ``hypothesis``.

    Row ``t`` depends only on ``(seed, t)``.
    """
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")

    def run(idx):
        try:
            return glr_batch(scenario, scenario.sample_batch(hypothesis, seed, idx))
        except KlicError as exc:
            raise _locate_failure(scenario, hypothesis, seed, idx, exc) from exc

    chunks = _chunks(trials)
    workers = min(workers or default_workers(), len(chunks))
    if workers <= 1:
        parts = [run(idx) for idx in chunks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, chunks))
    return np.concatenate(parts, axis=0)


def replay_trial(scenario, rule, hypothesis, seed, trial, trials=None, eta=None, two_stage=False):
    """Per-hypothesis scores of one trial of a run of ``trials`` trials.

    Batched kernels are not bit-stable across batch sizes, so the whole chunk
    holding ``trial`` is recomputed exactly as :func:`simulate_glr` does.
    """
    if trials is not None and not 0 <= trial < trials:
        raise InvalidInputError(f"trial {trial} out of range 0..{trials - 1}")
    start = trial - trial % CHUNK
    stop = start + CHUNK if trials is None else min(start + CHUNK, trials)
    data = scenario.sample_batch(hypothesis, seed, np.arange(start, stop))
    lam = glr_batch(scenario, data)[trial - start]
    h = penalties_for(scenario, rule)
    counts = param_counts_for(scenario)
    scores = [HypothesisScore(m + 1, float(lam[m]), counts[m], float(h[m])) for m in range(len(lam))]
    stat, m_hat = decision_statistic(lam[None], h, two_stage)
    decision = None
    if eta is not None:
        detected = bool(stat[0] > eta)
        decision = Decision(detected, int(m_hat[0]) if detected else 0, float(stat[0]))
    return scores, decision


# -- calibration --------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationSpec:
    """Target false-alarm probability and trial budget (default ``100 / pfa``)."""

    pfa: float
    trials: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.pfa < 1:
            raise InvalidInputError(f"pfa must lie in (0, 1), got {self.pfa}")
        if self.trials is None:
            object.__setattr__(self, "trials", int(math.ceil(100 / self.pfa - 1e-9)))
        if self.trials * self.pfa < 10 - 1e-9:
            raise InsufficientTrialsError(
                f"{self.trials} trials cannot calibrate pfa={self.pfa}; need at least {math.ceil(10 / self.pfa)}"
            )
        if self.trials * self.pfa < 100 - 1e-9:
            warnings.warn(f"fewer than 100/pfa trials ({self.trials}); threshold will be noisy", stacklevel=2)


def threshold_from_scores(scores, pfa):
    """Order statistic ``ceil((1 - pfa) n)`` (1-based) of the sorted null scores."""
    scores = np.sort(np.asarray(scores, dtype=float).ravel())
    n = scores.size
    if n * pfa < 1 - 1e-9:
        raise InsufficientTrialsError(f"{n} trials give no false alarm at pfa={pfa}")
    k = n - int(math.floor(n * pfa + 1e-9))
    return float(scores[k - 1])


def calibrate_threshold(scenario, detector, spec, workers=None):
    lam = simulate_glr(scenario, 0, spec.trials, derive_seed(spec.seed, "h0"), workers)
    stat, _ = detector.evaluate(lam, penalties_for(scenario, detector.rule))
    return threshold_from_scores(stat, spec.pfa)


# -- estimates ----------------------------------------------------------------


def wilson_interval(successes, n, z=Z95):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise InvalidInputError("n must be positive")
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def binomial_stderr(p, n):
    return math.sqrt(max(p * (1 - p), 0.0) / n)


@dataclass
class PdPoint:
    sweep_value: float
    pd: float
    stderr: float
    trials: int


def correct_detection_rate(stat, m_hat, eta, truth):
    hits = int(np.count_nonzero((stat > eta) & (m_hat == truth)))
    n = stat.size
    return hits / n, n


def estimate_pd(detector, eta, sweep, truth_m, trials=10_000, seed=0, workers=None):
    """``P(detected and m_hat = truth_m)`` at each ``(sweep_value, scenario)`` point."""
    curve = []
    seed_h = derive_seed(seed, "h", truth_m)
    for value, scenario in sweep:
        lam = simulate_glr(scenario, truth_m, trials, seed_h, workers)
        stat, m_hat = detector.evaluate(lam, penalties_for(scenario, detector.rule))
        pd, n = correct_detection_rate(stat, m_hat, eta, truth_m)
        curve.append(PdPoint(float(value), pd, binomial_stderr(pd, n), n))
    return curve


def histogram_row(stat, m_hat, eta, n_hypotheses):
    """Fraction of trials selecting each ``m = 1..M``; misses are the remainder."""
    detected = stat > eta
    counts = np.bincount(m_hat[detected], minlength=n_hypotheses + 1)[1:]
    return counts / stat.size


def classification_histogram(detector, eta, scenario, truths, trials=10_000, seed=0, workers=None):
    """``{n: [P(select m | H_n) for m = 1..M]}`` for each true hypothesis ``n``."""
    h = penalties_for(scenario, detector.rule)
    out = {}
    for n in truths:
        lam = simulate_glr(scenario, n, trials, derive_seed(seed, "h", n), workers)
        stat, m_hat = detector.evaluate(lam, h)
        out[n] = histogram_row(stat, m_hat, eta, len(h))
    return out


def window_rmse(stat, m_hat, eta, l, true_start, true_size):
    """Size and position (start bin) RMSE over detected trials.

    Returns ``(rmse_size, rmse_position, n_detected)``; NaNs when nothing was
    detected.
    """
    detected = stat > eta
    n_det = int(np.count_nonzero(detected))
    if n_det == 0:
        return math.nan, math.nan, 0
    start, size = rst.window_geometry(m_hat[detected], l)
    rmse_size = float(np.sqrt(np.mean((size - true_size) ** 2)))
    rmse_pos = float(np.sqrt(np.mean((start - true_start) ** 2)))
    return rmse_size, rmse_pos, n_det


# -- CFAR verification --------------------------------------------------------


@dataclass
class CfarEntry:
    label: str
    pfa: float
    false_alarms: int
    trials: int
    ci_low: float
    ci_high: float
    passed: bool


def pfa_interval(pfa_target, trials, calibration_trials=None):
    """95% Wilson interval around the target for a measured false-alarm rate.

    When the threshold was itself estimated from ``calibration_trials`` null
    draws, the effective count ``1 / (1/trials + 1/calibration_trials)``
    accounts for the spread of the calibrated threshold.
    """
    n = trials
    if calibration_trials:
        n = 1.0 / (1.0 / trials + 1.0 / calibration_trials)
    return wilson_interval(pfa_target * n, n)


def measure_pfa(scenario, detector, eta, trials, seed, workers=None):
    lam = simulate_glr(scenario, 0, trials, seed, workers)
    stat, _ = detector.evaluate(lam, penalties_for(scenario, detector.rule))
    return int(np.count_nonzero(stat > eta))


def cfar_check(detector, eta, scenarios, pfa_target, trials, seed=0, calibration_trials=None, workers=None):
    """Measured false-alarm rate under each nuisance setting, on common seeds.

    ``scenarios`` is a list of ``(label, scenario)`` pairs differing only in
    nuisance parameters. Each entry passes iff its measured rate lies in the
    interval from :func:`pfa_interval`.
    """
    lo, hi = pfa_interval(pfa_target, trials, calibration_trials)
    entries = []
    verify_seed = derive_seed(seed, "verify")
    for label, scenario in scenarios:
        fa = measure_pfa(scenario, detector, eta, trials, verify_seed, workers)
        p = fa / trials
        entries.append(CfarEntry(label, p, fa, trials, lo, hi, lo <= p <= hi))
    return entries


# -- reports ------------------------------------------------------------------


@dataclass
class MonteCarloReport:
    scenario: str
    rule: str
    threshold: float
    seed: int
    config: dict = field(default_factory=dict)
    sweep_axis: str = ""
    pd_given_m: dict = field(default_factory=dict)  # truth m -> list[PdPoint]
    histograms: dict = field(default_factory=dict)  # sweep value -> {truth n: list of probs}
    rmse_size: list = field(default_factory=list)
    rmse_position: list = field(default_factory=list)
    rmse_detected: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["pd_given_m"] = {str(m): [asdict(p) for p in pts] for m, pts in self.pd_given_m.items()}
        d["histograms"] = {
            str(v): {str(n): list(map(float, row)) for n, row in hist.items()} for v, hist in self.histograms.items()
        }
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["pd_given_m"] = {int(m): [PdPoint(**p) for p in pts] for m, pts in d["pd_given_m"].items()}
        d["histograms"] = {
            float(v): {int(n): [float(x) for x in row] for n, row in hist.items()} for v, hist in d["histograms"].items()
        }
        return cls(**d)
