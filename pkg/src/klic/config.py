"""Experiment configuration: flat ``key=value`` files, CLI overrides, unit conversion.

Power ratios are given in dB and angles in degrees here and converted to
linear units / radians exactly once, when scenario objects are built.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .detector import PenaltyRule
from .errors import InvalidConfigError
from .signal_model import NOISE_PLACEMENTS, CjScenario, NljScenario, RstScenario

SCENARIOS = ("nlj", "cj", "rst")
SWEEP_AXES = {"nlj": ("jnr",), "cj": ("jcnr", "snr"), "rst": ("sinr",)}
DEFAULT_SWEEPS = {"nlj": "jnr:0:30:2", "cj": "jcnr:0:30:3", "rst": "sinr:0:30:3"}


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _ints(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def parse_sweep(text):
    """``"axis:start:stop:step"`` (dB, stop inclusive) -> ``(axis, grid)``."""
    parts = str(text).split(":")
    if len(parts) != 4:
        raise InvalidConfigError("sweep", f"expected axis:start:stop:step, got {text!r}")
    axis = parts[0].strip().lower()
    try:
        start, stop, step = (float(p) for p in parts[1:])
    except ValueError:
        raise InvalidConfigError("sweep", f"non-numeric grid in {text!r}") from None
    if step <= 0 or stop < start:
        raise InvalidConfigError("sweep", "grid must be increasing with positive step")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return axis, [round(start + i * step, 10) for i in range(count)]


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


@dataclass
class ExperimentConfig:
    scenario: str = "nlj"
    rule: str = "gic"
    rho: float | None = 2.0
    two_stage: bool = False
    n: int = 16
    k: int = 32
    l: int = 10
    n_j: int = 6
    pfa: float = 1e-2
    calibration_trials: int | None = None
    trials: int = 10_000
    seed: int = 0
    sweep: str = ""
    jnr_db: float = 10.0
    snr_db: float = 20.0
    jcnr_db: float = 20.0
    sinr_db: float = 20.0
    cnr_db: float = 20.0
    rho_c: float = 0.95
    sigma_n2: float = 1.0
    noise_placement: str = "diagonal"
    jammer_angles_deg: tuple = (10.0, 20.0, -15.0)
    target_angle_deg: float = 0.0
    subspace_angles_deg: tuple = (35.0, 40.0, 45.0)
    jammer_angle_deg: float = 40.0
    occupied_bins: tuple = (4, 5)
    histogram_db: float | None = None
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_mapping(cls, values):
        """Build from string-valued ``key=value`` pairs, converting types."""
        names = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in names:
                raise InvalidConfigError(key, "unknown configuration key")
            kwargs[key] = _convert(key, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path, overrides=None):
        values = read_key_values(path)
        values.update(overrides or {})
        return cls.from_mapping(values)

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise InvalidConfigError("scenario", f"must be one of {SCENARIOS}")
        if str(self.rule).lower() != "gic":
            self.rho = None
        self.penalty_rule()
        if not 0 < self.pfa < 1:
            raise InvalidConfigError("pfa", "must lie in (0, 1)")
        if self.trials < 1:
            raise InvalidConfigError("trials", "must be >= 1")
        if self.noise_placement not in NOISE_PLACEMENTS:
            raise InvalidConfigError("noise_placement", f"must be one of {NOISE_PLACEMENTS}")
        for key in ("jammer_angles_deg", "subspace_angles_deg"):
            for a in getattr(self, key):
                if not abs(a) < 90:
                    raise InvalidConfigError(key, f"angle {a} outside (-90, 90) degrees")
        for key in ("target_angle_deg", "jammer_angle_deg"):
            if not abs(getattr(self, key)) < 90:
                raise InvalidConfigError(key, "angle outside (-90, 90) degrees")
        if not self.sweep:
            self.sweep = DEFAULT_SWEEPS[self.scenario]
        axis, grid = parse_sweep(self.sweep)
        if axis not in SWEEP_AXES[self.scenario]:
            raise InvalidConfigError("sweep", f"axis {axis!r} not valid for {self.scenario}; use {SWEEP_AXES[self.scenario]}")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidConfigError("seed", "must be a 64-bit unsigned integer")
        # building every sweep point surfaces range errors before any simulation
        for value in grid:
            self.build_scenario(value)

    # -- derived --------------------------------------------------------------

    def penalty_rule(self):
        return PenaltyRule(self.rule, self.rho)

    @property
    def sweep_axis(self):
        return parse_sweep(self.sweep)[0]

    @property
    def sweep_grid(self):
        return parse_sweep(self.sweep)[1]

    @property
    def truths(self):
        """Hypotheses whose classification rows are reported."""
        if self.scenario == "nlj":
            return tuple(range(1, len(self.jammer_angles_deg) + 1))
        if self.scenario == "cj":
            return (1, 2, 3)
        return (self.build_scenario().true_hypothesis,)

    @property
    def histogram_point(self):
        if self.histogram_db is not None:
            return self.histogram_db
        return {"nlj": self.jnr_db, "cj": self.jcnr_db, "rst": self.sinr_db}[self.scenario]

    def build_scenario(self, sweep_value_db=None):
        """Scenario object in linear units, with the sweep axis set to ``sweep_value_db``."""
        db = {"jnr": self.jnr_db, "snr": self.snr_db, "jcnr": self.jcnr_db, "sinr": self.sinr_db}
        if sweep_value_db is not None:
            db[parse_sweep(self.sweep)[0]] = sweep_value_db
        lin = {key: db_to_linear(value) for key, value in db.items()}
        cnr = db_to_linear(self.cnr_db)
        if self.scenario == "nlj":
            return NljScenario(
                jammer_angles=np.deg2rad(self.jammer_angles_deg),
                jnr=lin["jnr"],
                n_j=self.n_j,
                n=self.n,
                k=self.k,
                sigma_n2=self.sigma_n2,
            )
        if self.scenario == "cj":
            return CjScenario(
                target_angle=float(np.deg2rad(self.target_angle_deg)),
                subspace_angles=np.deg2rad(self.subspace_angles_deg),
                jammer_angle=float(np.deg2rad(self.jammer_angle_deg)),
                snr=lin["snr"],
                jcnr=lin["jcnr"],
                cnr=cnr,
                rho_c=self.rho_c,
                n=self.n,
                k=self.k,
                sigma_n2=self.sigma_n2,
                noise_placement=self.noise_placement,
            )
        return RstScenario(
            occupied_bins=self.occupied_bins,
            l=self.l,
            sinr=lin["sinr"],
            cnr=cnr,
            rho_c=self.rho_c,
            target_angle=float(np.deg2rad(self.target_angle_deg)),
            n=self.n,
            k=self.k,
            sigma_n2=self.sigma_n2,
            noise_placement=self.noise_placement,
        )

    def echo(self):
        """Flat ``key -> str`` view used as the self-describing header of outputs."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(f"{x:g}" if isinstance(x, float) else str(x) for x in value)
            out[f.name] = "" if value is None else str(value)
        return out


_INT_KEYS = {"n", "k", "l", "n_j", "trials", "seed"}
_FLOAT_KEYS = {
    "pfa", "jnr_db", "snr_db", "jcnr_db", "sinr_db", "cnr_db", "rho_c", "sigma_n2",
    "target_angle_deg", "jammer_angle_deg",
}


def _convert(key, raw):
    if raw is None or (isinstance(raw, str) and raw.strip() == "" and key not in ("sweep",)):
        return None
    try:
        if key in _INT_KEYS:
            return int(float(raw)) if not isinstance(raw, int) else raw
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in ("rho", "histogram_db"):
            return float(raw)
        if key == "calibration_trials":
            return int(float(raw))
        if key == "two_stage":
            return _bool(raw)
        if key in ("jammer_angles_deg", "subspace_angles_deg"):
            return _floats(raw)
        if key == "occupied_bins":
            return _ints(raw)
        return str(raw).strip()
    except (TypeError, ValueError):
        raise InvalidConfigError(key, f"cannot parse value {raw!r}") from None


def read_key_values(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"line {lineno}", f"expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values
