import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klic import report
from klic.config import ExperimentConfig, db_to_linear, parse_sweep, read_key_values
from klic.errors import InvalidConfigError
from klic.montecarlo import MonteCarloReport, PdPoint
from klic.signal_model import CjScenario, NljScenario, RstScenario

prob = st.floats(0, 1, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-50, 50), prob, prob, st.integers(1, 10**6)), min_size=1, max_size=12))
def test_pd_csv_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "x_pd.csv"
    curve = [PdPoint(report.sig12(a), report.sig12(b), report.sig12(c), n) for a, b, c, n in rows]
    report.write_pd_csv(path, curve, {"scenario": "nlj", "seed": "3"})
    back, echo = report.read_pd_csv(path)
    assert back == curve
    assert echo == {"scenario": "nlj", "seed": "3"}


def test_rmse_csv_round_trip(tmp_path):
    rows = [
        {"sweep_value": 0.0, "rmse_size": report.sig12(1 / 3), "rmse_position": math.nan, "detected": 0, "trials": 10},
        {"sweep_value": 3.0, "rmse_size": 0.0, "rmse_position": report.sig12(math.sqrt(2)), "detected": 9, "trials": 10},
    ]
    path = report.write_rmse_csv(tmp_path / "rst_gic15_rmse.csv", rows, {"k": "v"})
    back, _ = report.read_rmse_csv(path)
    assert back[1] == rows[1]
    assert back[0]["rmse_size"] == rows[0]["rmse_size"] and math.isnan(back[0]["rmse_position"])


def test_json_report_round_trip(tmp_path):
    rep = MonteCarloReport(
        "rst", "gic15", -2057.15295589, 1, {"l": "10"}, "sinr",
        {14: [PdPoint(20.0, 0.985, 0.0027, 2000)]}, {20.0: {14: [0.0] * 13 + [0.985] + [0.0] * 41}},
        [0.1], [math.nan], [1970],
    )
    path = report.write_json(tmp_path / "r.json", rep)
    assert json.loads(path.read_text())["rmse_position"] == [None]
    back = report.read_report(path)
    assert back.pd_given_m == rep.pd_given_m
    assert back.histograms == rep.histograms


def test_svg_is_well_formed(tmp_path):
    import xml.etree.ElementTree as ET

    path = report.write_svg(tmp_path / "a.svg", {"one": ([0, 1, 2], [0.1, math.nan, 0.9]), "two": ([0, 2], [1, 1])})
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2


def test_artifact_name():
    assert report.artifact_name("nlj", "gic2", "pd", "csv") == "nlj_gic2_pd.csv"


def test_parse_sweep():
    assert parse_sweep("jnr:0:30:2") == ("jnr", [float(x) for x in range(0, 31, 2)])
    assert parse_sweep("sinr:0:1:0.25")[1] == [0.0, 0.25, 0.5, 0.75, 1.0]
    for bad in ("jnr:0:30", "jnr:a:b:c", "jnr:5:0:1", "jnr:0:5:0"):
        with pytest.raises(InvalidConfigError):
            parse_sweep(bad)


def test_db_conversion():
    assert db_to_linear(20.0) == pytest.approx(100.0)
    assert db_to_linear(0.0) == 1.0


def test_config_builds_linear_scenarios():
    cfg = ExperimentConfig(scenario="cj", sweep="snr:10:20:10", jcnr_db=10.0)
    sc = cfg.build_scenario(20.0)
    assert isinstance(sc, CjScenario)
    assert sc.snr == pytest.approx(100.0) and sc.jcnr == pytest.approx(10.0)
    assert sc.jammer_angle == pytest.approx(np.deg2rad(40.0))
    assert isinstance(ExperimentConfig().build_scenario(), NljScenario)
    rst = ExperimentConfig(scenario="rst").build_scenario()
    assert isinstance(rst, RstScenario) and rst.true_hypothesis == 14


def test_config_rejects_bad_values():
    with pytest.raises(InvalidConfigError) as info:
        ExperimentConfig(rule="gic", rho=0.5)
    assert info.value.key == "rho"
    with pytest.raises(InvalidConfigError) as info:
        ExperimentConfig.from_mapping({"bogus_key": "1"})
    assert info.value.key == "bogus_key"
    with pytest.raises(InvalidConfigError) as info:
        ExperimentConfig(scenario="nlj", sweep="sinr:0:10:5")
    assert info.value.key == "sweep"
    with pytest.raises(InvalidConfigError) as info:
        ExperimentConfig.from_mapping({"n": "many"})
    assert info.value.key == "n"
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(scenario="rst", occupied_bins=(9, 10, 11))


def test_non_gic_rules_drop_rho():
    cfg = ExperimentConfig(rule="bic_k")
    assert cfg.rho is None
    assert cfg.penalty_rule().label == "bic_k"


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("# demo\nscenario = rst\nrule = gic\nrho = 15  # tuned\noccupied_bins = 2,3,4\n")
    assert read_key_values(path)["rho"] == "15"
    cfg = ExperimentConfig.from_file(path, {"sinr_db": "25"})
    assert cfg.rho == 15.0 and cfg.occupied_bins == (2, 3, 4) and cfg.sinr_db == 25.0
    assert cfg.echo()["occupied_bins"] == "2,3,4"
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario\n")
    with pytest.raises(InvalidConfigError):
        read_key_values(bad)
