import json
import subprocess
import sys

import numpy as np
import pytest

from klic import cli
from klic import montecarlo as mc
from klic import report
from klic.config import ExperimentConfig
from klic.linalg import derive_seed

SMALL = ["--pfa", "0.05", "--calibration-trials", "2000", "--trials", "400"]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_nlj_writes_artifacts(tmp_path, capsys):
    code, out, _ = run(["run", "--scenario", "nlj", "--rule", "gic", "--rho", "2", "--sweep", "jnr:0:30:6",
                        "--output-dir", str(tmp_path), *SMALL], capsys)
    assert code == 0
    for metric, ext in (("calibration", "json"), ("pd", "csv"), ("report", "json"), ("pd", "svg")):
        assert (tmp_path / f"nlj_gic2_{metric}.{ext}").exists()
    curve, echo = report.read_pd_csv(tmp_path / "nlj_gic2_pd.csv")
    assert echo["scenario"] == "nlj" and echo["rho"] == "2.0"
    pds = [p.pd for p in curve]
    assert pds[-1] > 0.95 and pds[0] < 0.1
    assert all(b >= a - 0.05 for a, b in zip(pds, pds[1:]))
    assert "threshold" in out


def test_run_rst_report_keyed_by_true_window(tmp_path, capsys):
    code, _, _ = run(["run", "--scenario", "rst", "--rule", "gic", "--rho", "15", "--sweep", "sinr:10:20:10",
                      "--output-dir", str(tmp_path), *SMALL], capsys)
    assert code == 0
    rep = report.read_report(tmp_path / "rst_gic15_report.json")
    assert list(rep.pd_given_m) == [14]
    assert len(rep.histograms[20.0][14]) == 55
    rows, _ = report.read_rmse_csv(tmp_path / "rst_gic15_rmse.csv")
    assert [r["sweep_value"] for r in rows] == [10.0, 20.0]


def test_sweep_compares_rules_and_stages(tmp_path, capsys):
    code, out, _ = run(["sweep", "--scenario", "cj", "--rules", "gic,bic_k", "--sweep", "jcnr:10:20:10",
                        "--output-dir", str(tmp_path), *SMALL], capsys)
    assert code == 0
    for label in ("gic2", "gic2-ts", "bic_k", "bic_k-ts"):
        assert (tmp_path / f"cj_{label}_pd.csv").exists()
    assert (tmp_path / "cj_all_pd.svg").exists()


def test_rho_below_one_rejected(tmp_path, capsys):
    code, _, err = run(["run", "--rule", "gic", "--rho", "0.5", "--output-dir", str(tmp_path)], capsys)
    assert code == 2
    assert "rho" in err


def test_unknown_config_key_named(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("scenario = nlj\nfoo = 1\n")
    code, _, err = run(["calibrate", "--config", str(cfg)], capsys)
    assert code == 2 and "foo" in err


def test_calibrate_then_replay_matches_batch(tmp_path, capsys):
    args = ["--scenario", "cj", "--sweep", "jcnr:20:20:1", "--seed", "12", "--output-dir", str(tmp_path), *SMALL]
    code, out, _ = run(["calibrate", *args], capsys)
    assert code == 0
    eta = json.loads((tmp_path / "cj_gic2_calibration.json").read_text())["threshold"]
    assert f"threshold={eta:.12g}" in out

    code, out, _ = run(["replay", "--trial", "7", *args], capsys)
    assert code == 0
    printed = [float(line.split()[1]) for line in out.splitlines()[1:4]]
    cfg = ExperimentConfig(scenario="cj", sweep="jcnr:20:20:1", seed=12, pfa=0.05, calibration_trials=2000, trials=400)
    lam = mc.simulate_glr(cfg.build_scenario(20.0), 3, 400, derive_seed(12, "h", 3))
    np.testing.assert_array_equal(printed, lam[7])
    assert "decision: detected=" in out

    scores, _ = cli.replay(cfg, 7)
    np.testing.assert_array_equal([s.lam for s in scores], lam[7])
    tampered, _ = cli.replay(ExperimentConfig(**{**cfg.__dict__, "seed": 13}), 7)
    assert not np.array_equal([s.lam for s in tampered], lam[7])


def test_replay_null_phase_matches_calibration_draws(tmp_path):
    cfg = ExperimentConfig(scenario="nlj", seed=4, pfa=0.05, calibration_trials=2000, output_dir=str(tmp_path))
    lam0 = mc.simulate_glr(cfg.build_scenario(cfg.sweep_grid[0]), 0, 2000, derive_seed(4, "h0"))
    scores, decision = cli.replay(cfg, 1999, phase="h0", eta=0.0)
    np.testing.assert_array_equal([s.lam for s in scores], lam0[1999])
    assert decision is not None


def test_replay_index_out_of_range(tmp_path, capsys):
    code, _, err = run(["replay", "--trial", "400", "--output-dir", str(tmp_path), *SMALL], capsys)
    assert code == 2 and "trial" in err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "klic.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "calibrate" in proc.stdout and "replay" in proc.stdout


@pytest.mark.parametrize("flag", ["--paper-scale"])
def test_paper_scale_sets_pfa(flag):
    args = cli.build_parser().parse_args(["calibrate", flag])
    assert cli.config_from_args(args).pfa == cli.PAPER_PFA
