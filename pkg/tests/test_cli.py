import json
import math
import re

import numpy as np
import pytest

from qbound.cli import EXIT_DOMAIN, EXIT_IO, EXIT_OK, fmt, main

PI = math.pi

TWELVE_DIGIT = re.compile(r"^-?\d\.\d{11}e[+-]\d{2,3}$")


def run(args):
    return main(args)


def test_fmt_is_twelve_significant_digits():
    for value in (0.5, -1.23456789e-7, 12345.678, 1e300):
        assert TWELVE_DIGIT.match(fmt(value)), fmt(value)


def test_metrics_json(tmp_path, capsys):
    out = tmp_path / "metrics.json"
    code = run(["metrics", "--r", "0.5", "--theta", str(PI / 2), "--phi", str(3 * PI / 4),
                "--out", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert abs(data["new_metric"][2][2] - 0.2789132170942154) <= 1e-12
    assert abs(data["sld_metric"][2][2] - 0.25) <= 1e-12
    assert abs(data["monotone_RLD"][1] - 4.0 / 3.0) <= 1e-12
    assert abs(data["measurement_fisher_phiphi"] - 0.25) <= 1e-10


def test_metrics_csv_cells_are_formatted(tmp_path):
    out = tmp_path / "metrics.csv"
    code = run(["metrics", "--r", "0.5", "--format", "csv", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "quantity,value"
    for line in lines[1:]:
        _, value = line.split(",", 1)
        for cell in value.split(";"):
            if cell and cell not in ("True", "False"):
                assert TWELVE_DIGIT.match(cell), line


def test_metrics_domain_error_exit_code(capsys):
    code = run(["metrics", "--r", "0", "--theta", "1", "--phi", "1"])
    assert code == EXIT_DOMAIN
    assert "requires r in" in capsys.readouterr().err


def test_metrics_missing_r(capsys):
    code = run(["metrics"])
    assert code == EXIT_DOMAIN


def test_povm_validate_sharp(tmp_path):
    out = tmp_path / "val.json"
    code = run(["povm", "validate", "--r", "0.5", "--out", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert data["all_ok"] is True
    assert data["completeness_residual"] <= 1e-9
    assert data["family"].startswith("gaussian-sharp")


def test_povm_validate_tabulated_csv(tmp_path):
    table = tmp_path / "fam.csv"
    center = 3 * PI / 4
    grid = np.linspace(center - PI, center + PI, 41)
    lines = ["phi_hat,x11,x12,y12"]
    for g in grid:
        lines.append(f"{g!r},{1.0 / (2 * PI)!r},0.0,0.0")
    table.write_text("\n".join(lines) + "\n", encoding="utf-8")
    out = tmp_path / "val.json"
    code = run(["povm", "validate", "--r", "0.5", "--csv", str(table), "--out", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert data["completeness_residual"] <= 1e-9
    assert data["all_ok"] is True


def test_bounds_sweep_csv_and_determinism(tmp_path):
    args = ["bounds", "sweep", "--r-min", "0.1", "--r-max", "0.9", "--steps", "9",
            "--theta", "1.5707963", "--phi", "2.3561945", "--eps", "0",
            "--format", "csv"]
    out1 = tmp_path / "fig1a.csv"
    out2 = tmp_path / "fig1b.csv"
    assert run(args + ["--out", str(out1)]) == EXIT_OK
    assert run(args + ["--out", str(out2)]) == EXIT_OK
    b1 = out1.read_bytes()
    assert b1 == out2.read_bytes()
    lines = b1.decode().splitlines()
    assert lines[0] == "r,B_max,B_SLD,B_RLD,B_Fisher,B_Husimi,v,vg_minus_C"
    assert len(lines) == 10
    for line in lines[1:]:
        for cell in line.split(","):
            assert TWELVE_DIGIT.match(cell), line


def test_bounds_sweep_svg(tmp_path):
    out = tmp_path / "fig1.csv"
    svg = tmp_path / "fig1.svg"
    code = run(["bounds", "sweep", "--steps", "5", "--out", str(out), "--svg", str(svg),
                "--format", "csv", "--log-y"])
    assert code == EXIT_OK
    text = svg.read_text()
    assert text.startswith("<svg")
    assert text.count("<polyline") == 5
    # determinism of the chart itself
    svg2 = tmp_path / "fig2.svg"
    run(["bounds", "sweep", "--steps", "5", "--out", str(out), "--svg", str(svg2),
         "--format", "csv", "--log-y"])
    assert svg.read_bytes() == svg2.read_bytes()


def test_audit_json(tmp_path):
    out = tmp_path / "audit.json"
    code = run(["audit", "--r", "0.5", "--out", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert abs(data["fixed_window_residual"] + data["boundary_term"]) <= 1e-10
    assert data["slack_outer"] >= -1e-10
    assert data["imag_residual"] <= 1e-10


def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--r", "0.5", "--samples", "20000", "--seed", "42"]
    out1 = tmp_path / "sim1.json"
    out2 = tmp_path / "sim2.json"
    assert run(args + ["--out", str(out1)]) == EXIT_OK
    assert run(args + ["--out", str(out2)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    data = json.loads(out1.read_text())
    assert data["samples"] == 20000
    assert abs(data["mean_empirical"] - data["mean_quadrature"]) <= 3 * data["mean_standard_error"]


def test_simulate_env_seed_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("QBOUND_SEED", "123")
    out = tmp_path / "sim.json"
    assert run(["simulate", "--r", "0.5", "--samples", "1000", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["seed"] == 123


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("r=0.4\ntheta=1.0\nsigma=3.0\n", encoding="utf-8")
    out = tmp_path / "m.json"
    code = run(["metrics", "--config", str(cfg), "--r", "0.5", "--out", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert data["r"] == 0.5  # flag wins
    assert data["theta"] == 1.0  # file supplies the rest


def test_config_file_supplies_required_r(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("r=0.3\n", encoding="utf-8")
    out = tmp_path / "m.json"
    assert run(["metrics", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["r"] == 0.3


def test_config_file_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("r=0.3\nbogus=1\n", encoding="utf-8")
    assert run(["metrics", "--config", str(cfg)]) == EXIT_DOMAIN
    assert "unknown config key" in capsys.readouterr().err


def test_io_error_exit_code(tmp_path):
    missing_dir = tmp_path / "no" / "such" / "dir" / "out.json"
    assert run(["metrics", "--r", "0.5", "--out", str(missing_dir)]) == EXIT_IO


def test_selftest_passes(capsys):
    assert run(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") >= 8
