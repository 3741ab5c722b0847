"""Shared argument handling for the figure scripts."""

import argparse

from klic import montecarlo as mc
from klic.cli import PAPER_PFA, run_experiment
from klic.config import ExperimentConfig
from klic.detector import PenaltyRule


def parse_args(description, default_out):
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--pfa", type=float, default=1e-3)
    parser.add_argument("--trials", type=int, default=10_000, help="Pd trials per sweep point")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--output-dir", default=default_out)
    parser.add_argument("--paper-scale", action="store_true", help=f"pfa={PAPER_PFA:g} with 100/pfa calibration trials")
    args = parser.parse_args()
    if args.paper_scale:
        args.pfa = PAPER_PFA
    return args


def detectors(rules, stages=(False,)):
    """``rules`` is a list of ``(name, rho)`` pairs."""
    return [mc.Detector(PenaltyRule(name, rho), two) for name, rho in rules for two in stages]


def run(args, detector_list, **fields):
    config = ExperimentConfig(pfa=args.pfa, trials=args.trials, seed=args.seed, output_dir=args.output_dir, **fields)
    return run_experiment(config, detector_list)
