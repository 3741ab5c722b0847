"""Batch command line front end: ``klic calibrate | run | sweep | replay``.

Every configuration key can come from a ``--config`` file (``key=value``
lines) and be overridden by the matching ``--key`` flag. Outputs go to
``output_dir`` as ``<scenario>_<rule>_<metric>.<ext>``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import montecarlo as mc
from . import report
from .config import ExperimentConfig
from .detector import PenaltyRule
from .errors import InvalidConfigError, KlicError, TrialFailure
from .linalg import derive_seed

log = logging.getLogger("klic")

PAPER_PFA = 1e-4
SWEEP_RULES = ("half_p", "full_p", "gic", "bic_k")


def _calibration_trials(config):
    return config.calibration_trials or int(np.ceil(100 / config.pfa - 1e-9))


def run_experiment(config, detectors=None, workers=None, out=None):
    """Calibrate, sweep and write every artifact for each detector.

    All detectors share the simulated GLR statistics, so comparing rules or
    stages costs one simulation. Returns ``{label: MonteCarloReport}``.
    """
    if detectors is None:
        detectors = [mc.Detector(config.penalty_rule(), config.two_stage)]
    out = out or sys.stdout
    outdir = Path(config.output_dir)
    echo = config.echo()
    grid = config.sweep_grid
    scen0 = config.build_scenario(grid[0])
    spec = mc.CalibrationSpec(config.pfa, _calibration_trials(config), config.seed)

    lam0 = mc.simulate_glr(scen0, 0, spec.trials, derive_seed(config.seed, "h0"), workers)
    reports = {}
    for det in detectors:
        h = mc.penalties_for(scen0, det.rule)
        stat, _ = det.evaluate(lam0, h)
        eta = report.sig12(mc.threshold_from_scores(stat, config.pfa))
        reports[det.label] = mc.MonteCarloReport(
            scenario=config.scenario, rule=det.label, threshold=eta, seed=config.seed,
            config=echo, sweep_axis=config.sweep_axis,
        )

    truth = config.truths[-1] if config.scenario != "rst" else scen0.true_hypothesis
    seed_truth = derive_seed(config.seed, "h", truth)
    for value in grid:
        scen = config.build_scenario(value)
        lam = mc.simulate_glr(scen, truth, config.trials, seed_truth, workers)
        for det in detectors:
            rep = reports[det.label]
            stat, m_hat = det.evaluate(lam, mc.penalties_for(scen, det.rule))
            pd, n = mc.correct_detection_rate(stat, m_hat, rep.threshold, truth)
            point = mc.PdPoint(report.sig12(value), report.sig12(pd), report.sig12(mc.binomial_stderr(pd, n)), n)
            rep.pd_given_m.setdefault(truth, []).append(point)
            if config.scenario == "rst":
                ws = scen.windows[truth - 1]
                rs, rp, nd = mc.window_rmse(stat, m_hat, rep.threshold, scen.l, ws.start, ws.size)
                rep.rmse_size.append(report.sig12(rs))
                rep.rmse_position.append(report.sig12(rp))
                rep.rmse_detected.append(nd)

    hist_value = config.histogram_point
    scen_h = config.build_scenario(hist_value)
    for n in config.truths:
        lam = mc.simulate_glr(scen_h, n, config.trials, derive_seed(config.seed, "h", n), workers)
        for det in detectors:
            rep = reports[det.label]
            stat, m_hat = det.evaluate(lam, mc.penalties_for(scen_h, det.rule))
            row = mc.histogram_row(stat, m_hat, rep.threshold, lam.shape[1])
            rep.histograms.setdefault(report.sig12(hist_value), {})[n] = [report.sig12(x) for x in row]

    for label, rep in reports.items():
        _write_artifacts(config, rep, truth, outdir, echo)
    if len(detectors) > 1:
        series = {
            label: ([p.sweep_value for p in rep.pd_given_m[truth]], [p.pd for p in rep.pd_given_m[truth]])
            for label, rep in reports.items()
        }
        report.write_svg(
            outdir / report.artifact_name(config.scenario, "all", "pd", "svg"), series,
            xlabel=f"{config.sweep_axis.upper()} (dB)", ylabel=f"Pd|{truth}", title=f"{config.scenario}: Pd|{truth}",
            ylim=(0, 1),
        )
    _print_summary(config, reports, truth, out)
    return reports


def _write_artifacts(config, rep, truth, outdir, echo):
    scen, label = config.scenario, rep.rule
    report.write_json(outdir / report.artifact_name(scen, label, "calibration", "json"), {
        "threshold": rep.threshold, "pfa": config.pfa, "trials": _calibration_trials(config),
        "seed": config.seed, "config": echo,
    })
    curve = rep.pd_given_m[truth]
    report.write_pd_csv(outdir / report.artifact_name(scen, label, "pd", "csv"), curve, echo)
    report.write_json(outdir / report.artifact_name(scen, label, "report", "json"), rep)
    xs = [p.sweep_value for p in curve]
    axis = f"{config.sweep_axis.upper()} (dB)"
    report.write_svg(
        outdir / report.artifact_name(scen, label, "pd", "svg"), {label: (xs, [p.pd for p in curve])},
        xlabel=axis, ylabel=f"Pd|{truth}", title=f"{scen} {label}: Pd|{truth}", ylim=(0, 1),
    )
    if config.scenario == "rst":
        rows = [
            {"sweep_value": x, "rmse_size": s, "rmse_position": p, "detected": d, "trials": c.trials}
            for x, s, p, d, c in zip(xs, rep.rmse_size, rep.rmse_position, rep.rmse_detected, curve)
        ]
        report.write_rmse_csv(outdir / report.artifact_name(scen, label, "rmse", "csv"), rows, echo)
        report.write_svg(
            outdir / report.artifact_name(scen, label, "rmse", "svg"),
            {"size": (xs, rep.rmse_size), "position": (xs, rep.rmse_position)},
            xlabel=axis, ylabel="RMSE (bins)", title=f"{scen} {label}: window RMSE",
        )


def _print_summary(config, reports, truth, out):
    print(f"scenario={config.scenario} pfa={config.pfa:g} trials={config.trials} seed={config.seed}", file=out)
    header = f"{config.sweep_axis + '_db':>10}" + "".join(f"{label:>14}" for label in reports)
    print(f"{'threshold':>10}" + "".join(f"{rep.threshold:>14.6g}" for rep in reports.values()), file=out)
    print(header, file=out)
    curves = [rep.pd_given_m[truth] for rep in reports.values()]
    for i, point in enumerate(curves[0]):
        print(f"{point.sweep_value:>10g}" + "".join(f"{c[i].pd:>14.4f}" for c in curves), file=out)


def calibrate(config, detector=None, workers=None):
    detector = detector or mc.Detector(config.penalty_rule(), config.two_stage)
    spec = mc.CalibrationSpec(config.pfa, _calibration_trials(config), config.seed)
    eta = report.sig12(mc.calibrate_threshold(config.build_scenario(config.sweep_grid[0]), detector, spec, workers))
    outdir = Path(config.output_dir)
    report.write_json(outdir / report.artifact_name(config.scenario, detector.label, "calibration", "json"), {
        "threshold": eta, "pfa": config.pfa, "trials": spec.trials, "seed": config.seed, "config": config.echo(),
    })
    return eta


def replay(config, trial, phase="pd", sweep_index=0, hypothesis=None, eta=None):
    """Scores of one trial exactly as computed inside a batch run."""
    grid = config.sweep_grid
    if not 0 <= sweep_index < len(grid):
        raise InvalidConfigError("sweep_index", f"must be in 0..{len(grid) - 1}")
    scen = config.build_scenario(grid[sweep_index])
    if phase == "h0":
        hyp, seed, n_trials = 0, derive_seed(config.seed, "h0"), _calibration_trials(config)
    elif phase == "pd":
        truth = config.truths[-1] if config.scenario != "rst" else scen.true_hypothesis
        hyp = truth if hypothesis is None else hypothesis
        seed, n_trials = derive_seed(config.seed, "h", hyp), config.trials
    else:
        raise InvalidConfigError("phase", "must be 'h0' or 'pd'")
    if not 0 <= trial < n_trials:
        raise InvalidConfigError("trial", f"index {trial} out of range 0..{n_trials - 1}")
    detector = mc.Detector(config.penalty_rule(), config.two_stage)
    if eta is None:
        path = Path(config.output_dir) / report.artifact_name(config.scenario, detector.label, "calibration", "json")
        if path.exists():
            eta = json.loads(path.read_text())["threshold"]
    return mc.replay_trial(scen, detector.rule, hyp, seed, trial, n_trials, eta, detector.two_stage)


# -- argument parsing ---------------------------------------------------------


def _add_config_flags(parser):
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--paper-scale", action="store_true", help=f"use pfa={PAPER_PFA:g} (100/pfa calibration trials)")
    for f in dataclasses.fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "two_stage":
            parser.add_argument(flag, dest=f.name, action="store_const", const="true", default=None)
        else:
            parser.add_argument(flag, dest=f.name, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="klic", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("calibrate", "estimate the detection threshold under the null"),
        ("run", "calibrate, sweep Pd, histograms and RMSE for one rule"),
        ("sweep", "same as run for several rules, one- and two-stage"),
        ("replay", "dump the per-hypothesis scores of one trial"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_config_flags(p)
        if name == "sweep":
            p.add_argument("--rules", default=",".join(SWEEP_RULES), help="comma list; gic uses --rho")
            p.add_argument("--stages", default="one,two", help="comma list of one,two")
        if name == "replay":
            p.add_argument("--trial", type=int, required=True)
            p.add_argument("--phase", choices=("h0", "pd"), default="pd")
            p.add_argument("--sweep-index", type=int, default=0)
            p.add_argument("--hypothesis", type=int, default=None)
            p.add_argument("--eta", type=float, default=None)
    return parser


def config_from_args(args):
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(ExperimentConfig)
        if getattr(args, f.name, None) is not None
    }
    if args.paper_scale and "pfa" not in overrides:
        overrides["pfa"] = str(PAPER_PFA)
    if args.config:
        return ExperimentConfig.from_file(args.config, overrides)
    return ExperimentConfig.from_mapping(overrides)


def _sweep_detectors(config, rules, stages):
    detectors = []
    for name in rules.split(","):
        name = name.strip().lower()
        rule = PenaltyRule(name, (config.rho or 2.0) if name == "gic" else None)
        for stage in stages.split(","):
            detectors.append(mc.Detector(rule, stage.strip() == "two"))
    return detectors


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
        if args.command == "calibrate":
            eta = calibrate(config)
            print(f"threshold={eta:.12g} pfa={config.pfa:g} scenario={config.scenario} rule={config.penalty_rule().label}")
        elif args.command == "run":
            run_experiment(config)
        elif args.command == "sweep":
            run_experiment(config, _sweep_detectors(config, args.rules, args.stages))
        else:
            scores, decision = replay(config, args.trial, args.phase, args.sweep_index, args.hypothesis, args.eta)
            print(f"{'m':>4} {'lambda':>24} {'p':>6} {'h':>12} {'lambda-h':>24}")
            for s in scores:
                print(f"{s.m:>4} {s.lam:>24.17g} {s.p:>6} {s.penalty:>12.6g} {s.lam - s.penalty:>24.17g}")
            if decision is None:
                print("decision: no threshold available (pass --eta or run calibrate first)")
            else:
                print(f"decision: detected={decision.detected} m_hat={decision.m_hat} score={decision.score:.17g}")
    except InvalidConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TrialFailure as exc:
        print(f"numeric error: {exc} (replay with --trial {exc.trial})", file=sys.stderr)
        return 3
    except KlicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
