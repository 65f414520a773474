import json
import os
import subprocess
import sys

import yaml

from baroflow.cli import main

TINY_VERIFY = {
    "verify": {"geometry": {"n_quad": 48, "n_random_points": 2000}},
}

TINY_SIMULATE = {
    "simulate": {
        "system": "1.3",
        "geometry": {"R0": 1.0, "Rout": 2.0},
        "laws": {
            "a": {"kind": "gamma", "kappa": 1.0, "gamma": 1.4},
            "b": {"kind": "gamma", "kappa": 1.0, "gamma": 1.4},
            "s": {"kind": "gamma", "kappa": 0.1, "gamma": 2.0},
        },
        "init": {
            "rho_A0": 1.0,
            "rho_B0": 1.2,
            "rho_S0": "balance",
            "perturbation": {"amplitude": 1e-3, "width": 0.1, "location": 1.5},
        },
        "numerics": {"nr_A": 32, "nr_B": 32, "cfl": 0.4, "t_end": 0.3,
                     "output_dt": 0.05},
        "output": {"profiles": True},
    },
}


def write_config(tmp_path, payload, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(payload))
    return str(path)


def test_list_flag(capsys):
    assert main(["--list"]) == 0
    out = capsys.readouterr().out
    for name in ("verify", "vary", "decompose", "simulate"):
        assert name in out


def test_verify_run(tmp_path, capsys):
    cfg = write_config(tmp_path, TINY_VERIFY)
    out = tmp_path / "out"
    status = main(["verify", "--config", cfg, "--out", str(out), "--seed", "3"])
    assert status == 0
    summary = json.loads(capsys.readouterr().out.splitlines()[0])
    assert summary["failed"] == 0
    assert summary["passed"] >= 20
    assert (out / "report.jsonl").exists()
    assert (out / "report_summary.csv").exists()
    assert (out / "quadrature_nodes.csv").exists()
    # every record carries an identity tag
    for line in (out / "report.jsonl").read_text().splitlines():
        rec = json.loads(line)
        assert rec["identity"]
        assert "tolerance" in rec and "pass" in rec


def test_simulate_run_and_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path, TINY_SIMULATE)
    out = tmp_path / "sim"
    status = main(["simulate", "--config", cfg, "--out", str(out)])
    assert status == 0
    ts = (out / "timeseries.csv").read_text().splitlines()
    header = ts[0].split(",")
    assert header == [
        "t", "R", "Rdot", "rho_S", "mass_total", "mass_A", "mass_B",
        "energy_kinetic", "energy_internal", "energy_total",
    ]
    assert len(ts) >= 4
    for tag in ("a", "b"):
        prof = (out / f"profile_{tag}.csv").read_text().splitlines()
        assert prof[0] == "r,rho,u,pressure"


def test_simulate_equilibrium_constant_radius(tmp_path):
    payload = {"simulate": dict(TINY_SIMULATE["simulate"])}
    payload["simulate"]["init"] = {
        "rho_A0": 1.0, "rho_B0": 1.2, "rho_S0": "balance",
    }
    payload["simulate"]["energy_drift_tolerance"] = 1e-12
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "eq"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "timeseries.csv").read_text().splitlines()[1:]
    radii = {row.split(",")[1] for row in rows}
    assert radii == {"1"}  # R column identically constant


def test_config_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("verify: [not, a, mapping]\n")
    assert main(["verify", "--config", str(bad), "--out",
                 str(tmp_path / "o")]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.yaml"),
                 "--out", str(tmp_path / "o2")]) == 2


def test_vary_constraint_rejection(tmp_path, capsys):
    # a radial variation that does not vanish on the outer boundary
    payload = {
        "vary": {
            "extra_variation": {"kind": "radial", "eta_coeffs": [0.3]},
        }
    }
    cfg = write_config(tmp_path, payload)
    status = main(["vary", "--config", cfg, "--out", str(tmp_path / "v")])
    assert status == 2
    out = capsys.readouterr().out
    detail = json.loads(out.splitlines()[0])
    assert detail["error"] == "constraint"
    assert "outer-boundary" in detail["detail"]


def test_determinism_byte_identical(tmp_path):
    cfg = write_config(tmp_path, {**TINY_VERIFY, **TINY_SIMULATE})
    outs = []
    for tag in ("r1", "r2"):
        for sub in ("verify", "simulate"):
            assert main([sub, "--config", cfg, "--out",
                         str(tmp_path / tag / sub), "--seed", "7"]) == 0
        outs.append(tmp_path / tag)
    for sub in ("verify", "simulate"):
        d1, d2 = outs[0] / sub, outs[1] / sub
        names = sorted(os.listdir(d1))
        assert names == sorted(os.listdir(d2))
        for name in names:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "baroflow.cli", "--list"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
