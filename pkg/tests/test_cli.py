"""End-to-end tests of the command line interface, run in process."""

import json

import numpy as np
import pytest

from pcoselect import CheckReport, write_sample_csv
from pcoselect.cli import main


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    return str(path)


def _scn_cfg(**over):
    cfg = {
        "d": 1,
        "f": "uniform",
        "b": {"kind": "sine"},
        "sigma": {"kind": "constant", "c": 0.3},
        "noise": "gaussian",
        "n": 40,
        "replications": 2,
        "seed": 11,
    }
    cfg.update(over)
    return cfg


@pytest.fixture()
def dataset(tmp_path):
    """A simulated 1-d dataset plus its directory."""
    cfg = _write_json(tmp_path / "scn.json", _scn_cfg())
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    return out / "data.csv"


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def test_simulate_writes_dataset(tmp_path):
    cfg = _write_json(tmp_path / "scn.json", _scn_cfg(n=30))
    out = tmp_path / "out"
    rc = main(["simulate", "--config", cfg, "--out", str(out)])
    assert rc == 0
    lines = (out / "data.csv").read_text().splitlines()
    assert lines[0] == "x1,y"
    assert len(lines) == 31
    echo = json.loads((out / "scenario.json").read_text())
    assert echo["replication"] == 0
    assert echo["scenario"]["n"] == 30


def test_simulate_is_byte_deterministic(tmp_path):
    cfg = _write_json(tmp_path / "scn.json", _scn_cfg())
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "data.csv").read_bytes() == (b / "data.csv").read_bytes()
    assert (a / "scenario.json").read_bytes() == (b / "scenario.json").read_bytes()


def test_simulate_seed_override_changes_data(tmp_path):
    cfg = _write_json(tmp_path / "scn.json", _scn_cfg())
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(b), "--seed", "99"]) == 0
    assert (a / "data.csv").read_bytes() != (b / "data.csv").read_bytes()


def test_simulate_d2_header(tmp_path):
    cfg = _write_json(tmp_path / "scn.json", _scn_cfg(d=2, n=10))
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "data.csv").read_text().splitlines()[0] == "x1,x2,y"


def test_simulate_replication_field(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg0 = _write_json(tmp_path / "s0.json", {**_scn_cfg(), "replication": 0})
    cfg1 = _write_json(tmp_path / "s1.json", {**_scn_cfg(), "replication": 1})
    assert main(["simulate", "--config", cfg0, "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg1, "--out", str(b)]) == 0
    assert (a / "data.csv").read_bytes() != (b / "data.csv").read_bytes()


def test_simulate_replication_out_of_range(tmp_path, capsys):
    cfg = _write_json(tmp_path / "scn.json", {**_scn_cfg(), "replication": 7})
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "config error:" in capsys.readouterr().err


def test_simulate_invalid_noise(tmp_path, capsys):
    cfg = _write_json(tmp_path / "scn.json", _scn_cfg(noise="cauchy"))
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "config error:" in err and "noise" in err


def test_simulate_missing_config_file(tmp_path, capsys):
    rc = main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "not found" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# select
# ---------------------------------------------------------------------------


def _bandwidth_cfg(tmp_path, **over):
    cfg = {"variant": "bandwidth", "base": "gaussian", "h_min": 0.1, "grid": [0.1, 0.3], "d": 1}
    cfg.update(over)
    return _write_json(tmp_path / "family.json", cfg)


def test_select_end_to_end(tmp_path, dataset):
    cfg = _bandwidth_cfg(tmp_path)
    out = tmp_path / "sel"
    rc = main(["select", "--config", cfg, "--data", str(dataset), "--loss", "identity", "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "selection.json").read_text())
    assert doc["schema_version"] == 1
    assert len(doc["rows"]) == 2
    assert 0 <= doc["chosen_index"] < 2
    assert sum(r["chosen"] for r in doc["rows"]) == 1
    lines = (out / "selection.csv").read_text().splitlines()
    assert lines[0] == "index,id,distance,penalty,total,is_k0,is_chosen"
    assert sum(int(line.split(",")[-1]) for line in lines[1:]) == 1


def test_select_singleton_family(tmp_path, dataset):
    cfg = _bandwidth_cfg(tmp_path, grid=[0.3], h_min=0.3)
    out = tmp_path / "sel"
    rc = main(["select", "--config", cfg, "--data", str(dataset), "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "selection.json").read_text())
    assert doc["chosen_index"] == 0 and doc["k0_index"] == 0
    assert len(doc["rows"]) == 1


def test_select_reruns_byte_identical(tmp_path, dataset):
    cfg = _bandwidth_cfg(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["select", "--config", cfg, "--data", str(dataset), "--out", str(out)]) == 0
    assert (a / "selection.json").read_bytes() == (b / "selection.json").read_bytes()
    assert (a / "selection.csv").read_bytes() == (b / "selection.csv").read_bytes()


def test_select_empty_dataset_is_a_data_error(tmp_path, capsys):
    data = tmp_path / "empty.csv"
    data.write_text("x1,y\n", encoding="utf-8")
    cfg = _bandwidth_cfg(tmp_path)
    rc = main(["select", "--config", cfg, "--data", str(data), "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "data error:" in capsys.readouterr().err


def test_select_dimension_mismatch(tmp_path, dataset, capsys):
    cfg = _bandwidth_cfg(tmp_path, d=2, h_min=0.35, grid=[0.35, 0.6])
    rc = main(["select", "--config", cfg, "--data", str(dataset), "--out", str(tmp_path / "o")])
    assert rc == 4
    assert "dimension error:" in capsys.readouterr().err


def test_select_bad_family_variant(tmp_path, dataset, capsys):
    cfg = _write_json(tmp_path / "family.json", {"variant": "wavelet"})
    rc = main(["select", "--config", cfg, "--data", str(dataset), "--out", str(tmp_path / "o")])
    assert rc == 2


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def test_estimate_zero_responses_give_zero_curve(tmp_path):
    data = tmp_path / "flat.csv"
    x = np.linspace(0.1, 0.9, 20)[:, None]
    write_sample_csv(data, x, np.zeros(20))
    spec = _write_json(tmp_path / "spec.json", {"variant": "bandwidth", "base": "gaussian", "h": [0.2]})
    grid = _write_json(tmp_path / "grid.json", {"lo": 0.0, "hi": 1.0, "points": 7})
    out = tmp_path / "est"
    rc = main(
        ["estimate", "--config", grid, "--data", str(data), "--spec", spec,
         "--loss", "identity", "--out", str(out)]
    )
    assert rc == 0
    lines = (out / "estimate.csv").read_text().splitlines()
    assert lines[0] == "x1,estimate"
    assert len(lines) == 8
    assert all(float(line.split(",")[1]) == 0.0 for line in lines[1:])


def test_estimate_single_point_grid(tmp_path, dataset):
    spec = _write_json(
        tmp_path / "spec.json", {"spec": {"variant": "bandwidth", "base": "gaussian", "h": [0.25]}}
    )
    grid = _write_json(tmp_path / "grid.json", {"grid": {"lo": [0.5], "hi": [0.5], "points": [1]}})
    out = tmp_path / "est"
    rc = main(["estimate", "--config", grid, "--data", str(dataset), "--spec", spec, "--out", str(out)])
    assert rc == 0
    lines = (out / "estimate.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("0.5,")


def test_estimate_grid_dimension_mismatch(tmp_path, dataset, capsys):
    spec = _write_json(tmp_path / "spec.json", {"variant": "bandwidth", "base": "gaussian", "h": [0.25]})
    grid = _write_json(tmp_path / "grid.json", {"lo": [0.0, 0.0], "hi": [1.0, 1.0], "points": 5})
    rc = main(["estimate", "--config", grid, "--data", str(dataset), "--spec", spec, "--out", str(tmp_path / "o")])
    assert rc == 4
    assert "dimension error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_sine_tail_passes(tmp_path):
    cfg = _write_json(tmp_path / "v.json", {"p_max": 60, "grid_points": 2000})
    out = tmp_path / "ver"
    rc = main(["verify", "--suite", "sine-tail", "--config", cfg, "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "verify_sine-tail.json").read_text())
    assert doc["passed"] is True and doc["applicable"] is True


def test_verify_l1_trig_not_applicable_exits_zero(tmp_path, capsys):
    cfg = _write_json(
        tmp_path / "v.json",
        {"n": 64, "family": {"variant": "projection", "basis": "trigonometric", "m_max": 8, "d": 1}},
    )
    out = tmp_path / "ver"
    rc = main(["verify", "--suite", "l1-bound", "--config", cfg, "--out", str(out)])
    assert rc == 0  # not applicable is not a failure
    doc = json.loads((out / "verify_l1-bound.json").read_text())
    assert doc["passed"] is False and doc["applicable"] is False
    assert doc["margin"] is None
    assert "not applicable" in capsys.readouterr().out


def test_verify_l1_bandwidth_passes(tmp_path):
    cfg = _write_json(
        tmp_path / "v.json",
        {"n": 50, "family": {"variant": "bandwidth", "base": "epanechnikov", "h_min": 0.05, "grid": [0.05, 0.2], "d": 1}},
    )
    rc = main(["verify", "--suite", "l1-bound", "--config", cfg, "--out", str(tmp_path / "ver")])
    assert rc == 0


def test_verify_trig_bound_passes(tmp_path):
    cfg = _write_json(tmp_path / "v.json", {"scenario": _scn_cfg(), "loss": "identity", "draws": 2000})
    rc = main(["verify", "--suite", "trig-bound", "--config", cfg, "--out", str(tmp_path / "ver")])
    assert rc == 0


def test_verify_moment_conditions_passes(tmp_path):
    cfg = _write_json(
        tmp_path / "v.json",
        {
            "scenario": _scn_cfg(n=50),
            "family": {"variant": "bandwidth", "base": "gaussian", "h_min": 0.1, "grid": [0.1, 0.3], "d": 1},
            "loss": "identity",
            "draws": 5000,
        },
    )
    out = tmp_path / "ver"
    rc = main(["verify", "--suite", "moment-conditions", "--config", cfg, "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "verify_moment-conditions.json").read_text())
    assert doc["passed"] is True


def test_verify_legendre_bound_from_density(tmp_path):
    cfg = _write_json(tmp_path / "v.json", {"density": {"kind": "raised_cosine"}, "m_max": 30})
    out = tmp_path / "ver"
    rc = main(["verify", "--suite", "legendre-bound", "--config", cfg, "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "verify_legendre-bound.json").read_text())
    assert doc["passed"] is True


def test_verify_missing_required_field(tmp_path, capsys):
    cfg = _write_json(tmp_path / "v.json", {})
    rc = main(["verify", "--suite", "moment-conditions", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "missing field" in capsys.readouterr().err


def test_verify_failure_exits_five(tmp_path, monkeypatch, capsys):
    # every shipped suite checks a mathematically true bound, so a failing
    # report has to be injected to pin the exit-code contract
    import pcoselect.cli as cli

    failing = CheckReport(name="sine-tail", passed=False, margin=-0.25, details={"p_max": 1})
    monkeypatch.setattr(cli, "check_sine_tail_bound", lambda **kw: failing)
    out = tmp_path / "ver"
    rc = main(["verify", "--suite", "sine-tail", "--out", str(out)])
    assert rc == 5
    assert "verification failure:" in capsys.readouterr().err
    # the report is still written before the failure is raised
    doc = json.loads((out / "verify_sine-tail.json").read_text())
    assert doc["passed"] is False and doc["applicable"] is True


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def test_report_singleton_family_has_unit_ratio(tmp_path):
    cfg = _write_json(
        tmp_path / "r.json",
        {
            "scenario": _scn_cfg(n=60, replications=4),
            "family": {"variant": "bandwidth", "base": "gaussian", "h_min": 0.2, "grid": [0.2], "d": 1},
            "loss": "identity",
        },
    )
    out = tmp_path / "rep"
    rc = main(["report", "--config", cfg, "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "risk.json").read_text())
    assert doc["ratio"] == 1.0
    assert doc["oracle_index"] == 0
    lines = (out / "risk_by_kernel.csv").read_text().splitlines()
    assert len(lines) == 2


def test_report_risk_vs_n(tmp_path):
    cfg = _write_json(
        tmp_path / "r.json",
        {
            "scenario": _scn_cfg(replications=3),
            "family": {"variant": "bandwidth", "base": "gaussian", "h_min": 0.15, "grid": [0.15, 0.4], "d": 1},
            "loss": "identity",
            "n_values": [40, 60],
        },
    )
    out = tmp_path / "rep"
    rc = main(["report", "--config", cfg, "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "risk.json").read_text())
    assert [row["n"] for row in doc["by_n"]] == [40, 60]
    lines = (out / "risk_vs_n.csv").read_text().splitlines()
    assert lines[0] == "n,oracle_risk,pco_risk,pco_se,ratio"
    assert len(lines) == 3


def test_report_threads_do_not_change_bytes(tmp_path):
    cfg = _write_json(
        tmp_path / "r.json",
        {
            "scenario": _scn_cfg(n=50, replications=4),
            "family": {"variant": "bandwidth", "base": "gaussian", "h_min": 0.15, "grid": [0.15, 0.4], "d": 1},
            "loss": "identity",
        },
    )
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["report", "--config", cfg, "--out", str(a), "--threads", "1"]) == 0
    assert main(["report", "--config", cfg, "--out", str(b), "--threads", "4"]) == 0
    assert (a / "risk.json").read_bytes() == (b / "risk.json").read_bytes()
    assert (a / "risk_by_kernel.csv").read_bytes() == (b / "risk_by_kernel.csv").read_bytes()
