"""Config ingestion, mode dispatch, artifacts, exit codes, determinism."""

import hashlib
import json

import numpy as np

from passivebeam import cli


def base_config(**overrides):
    cfg = {
        "schema_version": 1,
        "seed": 0,
        "beam": {
            "rho": 1.0,
            "lambda_rigidity": 1.0,
            "length": 1.0,
            "tip_inertia": 0.1,
            "tip_mass": 0.1,
        },
        "mesh": {"n_elements": 6},
        "rotational": {
            "damper": {"name": "tanh", "params": {"gain": 2.0}},
            "spring": {"name": "cubic", "params": {}},
            "block": {"name": "cubic-drift", "params": {}},
        },
        "translational": {
            "damper": {"name": "tanh", "params": {"gain": 2.0}},
            "spring": {"name": "cubic", "params": {}},
            "block": {"name": "cubic-drift", "params": {}},
        },
        "integrator": {"dt": 0.001, "t_end": 0.5, "record_every": 10},
        "initial": {"kind": "first-mode", "tip_fraction": 0.1},
        "certify": {"radius": 1.5, "samples": 300},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=1))
    return path


def test_certify_mode_all_pass(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "out"
    assert cli.run("certify", path, out=out) == 0
    report = json.loads((out / "certification.json").read_text())
    assert report["passed"] is True
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exit_status"] == 0
    assert "certification.json" in summary["files"]


def test_certify_mode_broken_damper_exits_2(tmp_path):
    cfg = base_config()
    cfg["rotational"]["damper"] = {"name": "negative-linear", "params": {}}
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert cli.run("certify", path, out=out) == 2
    report = json.loads((out / "certification.json").read_text())
    assert report["passed"] is False
    failed = [
        c for c in report["sd_rotational"]["checks"] if not c["passed"]
    ]
    assert failed and all(c["witness"] is not None for c in failed)


def test_parse_error_exit_1(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"schema_version": 1,,}')
    assert cli.run("certify", path) == 1
    err = capsys.readouterr().err
    assert "line" in err and "column" in err


def test_unknown_keys_rejected(tmp_path):
    cfg = base_config()
    cfg["unexpected"] = True
    path = write_config(tmp_path, cfg)
    assert cli.run("certify", path, out=tmp_path / "out") == 1


def test_wrong_schema_version_rejected(tmp_path):
    cfg = base_config(schema_version=99)
    path = write_config(tmp_path, cfg)
    assert cli.run("certify", path, out=tmp_path / "out") == 1


def test_mode_mismatch_rejected(tmp_path):
    cfg = base_config(mode="certify")
    path = write_config(tmp_path, cfg)
    assert cli.run("simulate", path, out=tmp_path / "out") == 1


def test_simulate_mode_artifacts_and_hashes(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "out"
    assert cli.run("simulate", path, out=out) == 0
    for name in ("certification.json", "energy.csv", "trajectory.csv", "energy.svg", "summary.json"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    for name, digest in summary["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    # energy column non-increasing within the per-step budget
    rows = (out / "energy.csv").read_text().strip().splitlines()
    header = rows[0].split(",")
    totals = np.array([float(r.split(",")[header.index("total")]) for r in rows[1:]])
    assert np.all(np.diff(totals) <= 1e-8 * totals[0])
    assert summary["metrics"]["h_flagged"] is False


def test_simulate_outputs_deterministic(tmp_path):
    path = write_config(tmp_path, base_config())
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert cli.run("simulate", path, out=out_a) == 0
    assert cli.run("simulate", path, out=out_b) == 0
    for name in ("energy.csv", "trajectory.csv", "energy.svg", "certification.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_simulate_gates_on_certification(tmp_path):
    cfg = base_config()
    cfg["translational"]["block"] = {"name": "anti-stable", "params": {}}
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert cli.run("simulate", path, out=out) == 2
    assert not (out / "energy.csv").exists()


def test_spectrum_mode(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "out"
    assert cli.run("spectrum", path, out=out) == 0
    rows = (out / "spectrum.csv").read_text().strip().splitlines()
    assert rows[0] == "re,im"
    reals = [float(r.split(",")[0]) for r in rows[1:]]
    assert max(reals) < 0.0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["metrics"]["n_unstable"] == 0


def test_skew_mode(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "out"
    assert cli.run("skew", path, out=out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["metrics"]["skew_defect"] <= 1e-12


def test_convergence_mode(tmp_path):
    cfg = base_config()
    cfg["convergence"] = {"meshes": [4, 8, 16]}
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert cli.run("convergence", path, out=out) == 0
    rows = (out / "convergence.csv").read_text().strip().splitlines()
    errs = [float(r.split(",")[3]) for r in rows[1:]]
    assert errs[0] > errs[1] > errs[2]
    orders = [float(r.split(",")[4]) for r in rows[2:]]
    assert all(o >= 2.0 for o in orders)


def test_seed_override_recorded(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "out"
    assert cli.run("certify", path, out=out, seed=42) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 42


def test_missing_required_section(tmp_path):
    cfg = base_config()
    del cfg["rotational"]
    path = write_config(tmp_path, cfg)
    assert cli.run("certify", path, out=tmp_path / "out") == 1


def test_main_entry_point(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "out"
    assert cli.main(["certify", "--config", str(path), "--out", str(out)]) == 0
