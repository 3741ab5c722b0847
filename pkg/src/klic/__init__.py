"""Penalized-GLR detection for multiple alternative hypotheses in adaptive radar."""

from .detector import (
    Decision,
    HypothesisScore,
    ModelPrior,
    PenaltyKind,
    PenaltyRule,
    map_ml_decide,
    one_stage_decide,
    penalty,
    two_stage_decide,
)
from .linalg import SeededRng
from .signal_model import CjScenario, NljScenario, RstScenario

__all__ = [
    "CjScenario",
    "Decision",
    "HypothesisScore",
    "ModelPrior",
    "NljScenario",
    "PenaltyKind",
    "PenaltyRule",
    "RstScenario",
    "SeededRng",
    "map_ml_decide",
    "one_stage_decide",
    "penalty",
    "two_stage_decide",
]

__version__ = "0.1.0"
