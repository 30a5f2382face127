"""Batch front-end: config ingestion, run orchestration, reports, plots.

One JSON config file drives one run. Modes: certify, simulate, spectrum,
skew, convergence. Exit codes: 0 success, 1 config error, 2 certification
failure, 3 numerical failure. All emitted files are listed with content
hashes in summary.json; identical config and seed give byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, assumptions, discretization, dynamics, integrator
from ._svg import line_plot_svg
from .beam_model import (
    BeamParams,
    ClosedLoopConfig,
    SpringDamperLaw,
    linearize_block,
    make_block,
    make_law,
)
from .errors import ConfigParseError, PassiveBeamError

MODES = ("certify", "simulate", "spectrum", "skew", "convergence")

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version",
    "mode",
    "seed",
    "output_dir",
    "beam",
    "mesh",
    "rotational",
    "translational",
    "integrator",
    "initial",
    "certify",
    "convergence",
}
_BEAM_KEYS = {"rho", "lambda_rigidity", "length", "tip_inertia", "tip_mass"}
_MESH_KEYS = {"n_elements"}
_CHANNEL_KEYS = {"damper", "spring", "block"}
_NAMED_KEYS = {"name", "params"}
_INTEGRATOR_KEYS = {"dt", "t_end", "newton_tol", "newton_max_iter", "record_every"}
_INITIAL_KEYS = {"kind", "tip_fraction"}
_CERTIFY_KEYS = {"radius", "samples", "h_threshold"}
_CONVERGENCE_KEYS = {"meshes"}


def _reject_unknown(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigParseError(f"unknown keys in {where}: {sorted(unknown)}")


def _require(section: dict, keys, where: str):
    missing = [k for k in keys if k not in section]
    if missing:
        raise ConfigParseError(f"missing keys in {where}: {missing}")


class RunConfig:
    """Validated run configuration."""

    def __init__(self, raw: dict, mode: str, seed_override=None, out_override=None):
        if not isinstance(raw, dict):
            raise ConfigParseError("config root must be a JSON object")
        _reject_unknown(raw, _TOP_KEYS, "config root")
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise ConfigParseError(
                f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}"
            )
        if "mode" in raw and raw["mode"] != mode:
            raise ConfigParseError(
                f"config mode {raw['mode']!r} does not match requested mode {mode!r}"
            )
        if mode not in MODES:
            raise ConfigParseError(f"mode must be one of {MODES}")
        self.mode = mode
        self.seed = int(seed_override if seed_override is not None else raw.get("seed", 0))
        self.output_dir = Path(out_override if out_override is not None else raw.get("output_dir", "out"))
        self.raw = raw

        _require(raw, ["beam"], "config root")
        _reject_unknown(raw["beam"], _BEAM_KEYS, "beam")
        _require(raw["beam"], _BEAM_KEYS, "beam")
        self.beam = BeamParams(**{k: float(raw["beam"][k]) for k in _BEAM_KEYS})

        self.n_elements = None
        if "mesh" in raw:
            _reject_unknown(raw["mesh"], _MESH_KEYS, "mesh")
            _require(raw["mesh"], _MESH_KEYS, "mesh")
            self.n_elements = int(raw["mesh"]["n_elements"])

        self.channels = {}
        for channel in ("rotational", "translational"):
            if channel not in raw:
                continue
            section = raw[channel]
            _reject_unknown(section, _CHANNEL_KEYS, channel)
            _require(section, _CHANNEL_KEYS, channel)
            parsed = {}
            for part in _CHANNEL_KEYS:
                entry = section[part]
                _reject_unknown(entry, _NAMED_KEYS, f"{channel}.{part}")
                _require(entry, ["name"], f"{channel}.{part}")
                parsed[part] = (str(entry["name"]), dict(entry.get("params", {})))
            self.channels[channel] = parsed

        self.integrator = None
        if "integrator" in raw:
            section = raw["integrator"]
            _reject_unknown(section, _INTEGRATOR_KEYS, "integrator")
            _require(section, ["dt", "t_end"], "integrator")
            self.integrator = integrator.IntegratorSettings(
                dt=float(section["dt"]),
                t_end=float(section["t_end"]),
                newton_tol=float(section.get("newton_tol", 1e-10)),
                newton_max_iter=int(section.get("newton_max_iter", 25)),
                record_every=int(section.get("record_every", 1)),
            )

        self.initial = {"kind": "first-mode", "tip_fraction": 0.1}
        if "initial" in raw:
            _reject_unknown(raw["initial"], _INITIAL_KEYS, "initial")
            self.initial.update(raw["initial"])
            if self.initial["kind"] not in ("first-mode", "zero"):
                raise ConfigParseError("initial.kind must be 'first-mode' or 'zero'")

        self.certify = {"radius": 2.0, "samples": 300, "h_threshold": 0.0}
        if "certify" in raw:
            _reject_unknown(raw["certify"], _CERTIFY_KEYS, "certify")
            self.certify.update(raw["certify"])

        self.meshes = None
        if "convergence" in raw:
            _reject_unknown(raw["convergence"], _CONVERGENCE_KEYS, "convergence")
            _require(raw["convergence"], ["meshes"], "convergence")
            self.meshes = [int(m) for m in raw["convergence"]["meshes"]]

    # -- builders -----------------------------------------------------------
    def needs(self, *attrs):
        for attr in attrs:
            if getattr(self, attr) in (None, {}):
                raise ConfigParseError(f"mode {self.mode!r} requires the {attr!r} section")

    def build_channel(self, channel: str):
        try:
            names = self.channels[channel]
        except KeyError:
            raise ConfigParseError(f"mode {self.mode!r} requires the {channel!r} section") from None
        try:
            damper = make_law(names["damper"][0], **names["damper"][1])
            spring = make_law(names["spring"][0], **names["spring"][1])
            block = make_block(names["block"][0], **names["block"][1])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigParseError(f"bad {channel} channel: {exc}") from exc
        return SpringDamperLaw(damper=damper, spring=spring), block

    def closed_loop(self) -> ClosedLoopConfig:
        sd1, blk1 = self.build_channel("rotational")
        sd2, blk2 = self.build_channel("translational")
        return ClosedLoopConfig(
            beam=self.beam,
            sd_rotational=sd1,
            sd_translational=sd2,
            block_rotational=blk1,
            block_translational=blk2,
        )

    def system(self) -> discretization.DiscreteSystem:
        self.needs("n_elements")
        mesh = discretization.build_mesh(self.beam, self.n_elements)
        return discretization.assemble(self.beam, mesh, clamp_left=True)


# ---------------------------------------------------------------------------
# Artifact writing
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{float(x):.17g}"


class ArtifactWriter:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: dict[str, str] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def _register(self, name: str):
        digest = hashlib.sha256((self.out_dir / name).read_bytes()).hexdigest()
        self.files[name] = digest

    def write_csv(self, name: str, header, rows):
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        self._register(name)

    def write_json(self, name: str, payload: dict):
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self._register(name)

    def write_svg(self, name: str, series, title, xlabel, ylabel, logy=False):
        line_plot_svg(self.out_dir / name, series, title, xlabel, ylabel, logy=logy)
        self._register(name)

    def summary(self, mode: str, seed: int, exit_status: int, metrics: dict):
        payload = {
            "mode": mode,
            "seed": seed,
            "exit_status": exit_status,
            "files": dict(sorted(self.files.items())),
            "metrics": metrics,
        }
        path = self.out_dir / "summary.json"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------

def _run_certification(cfg: RunConfig, loop: ClosedLoopConfig):
    radius = float(cfg.certify["radius"])
    samples = int(cfg.certify["samples"])
    threshold = float(cfg.certify["h_threshold"])
    reports = {
        "sd_rotational": assumptions.certify_spring_damper(
            loop.sd_rotational, radius, samples, seed=cfg.seed
        ),
        "sd_translational": assumptions.certify_spring_damper(
            loop.sd_translational, radius, samples, seed=cfg.seed
        ),
        "block_rotational": assumptions.certify_block(
            loop.block_rotational, radius, max(samples, 100 * loop.block_rotational.dim),
            h_threshold=threshold, seed=cfg.seed,
        ),
        "block_translational": assumptions.certify_block(
            loop.block_translational, radius, max(samples, 100 * loop.block_translational.dim),
            h_threshold=threshold, seed=cfg.seed,
        ),
    }
    all_passed = all(r.passed for r in reports.values())
    payload = {name: rep.as_dict() for name, rep in reports.items()}
    payload["passed"] = all_passed
    return all_passed, payload


def _mode_certify(cfg: RunConfig, writer: ArtifactWriter) -> int:
    loop = cfg.closed_loop()
    passed, payload = _run_certification(cfg, loop)
    writer.write_json("certification.json", payload)
    status = 0 if passed else 2
    writer.summary(cfg.mode, cfg.seed, status, {"certification_passed": passed})
    return status


def _mode_simulate(cfg: RunConfig, writer: ArtifactWriter) -> int:
    loop = cfg.closed_loop()
    passed, payload = _run_certification(cfg, loop)
    writer.write_json("certification.json", payload)
    if not passed:
        writer.summary(cfg.mode, cfg.seed, 2, {"certification_passed": False})
        return 2
    cfg.needs("integrator")
    sys_d = cfg.system()
    if cfg.initial["kind"] == "zero":
        y0 = dynamics.zero_state(sys_d, loop)
    else:
        y0 = integrator.first_mode_initial_state(
            sys_d, loop, tip_fraction=float(cfg.initial["tip_fraction"])
        )
    traj = integrator.simulate(y0, cfg.integrator, sys_d, loop)

    lin1 = linearize_block(loop.block_rotational)
    lin2 = linearize_block(loop.block_translational)
    qnorms = [
        float(np.sqrt(max(dynamics.state_qnorm2(s, sys_d, loop, lin1, lin2), 0.0)))
        for s in traj.states
    ]

    energy_rows = [e.csv_row(t) for t, e in zip(traj.times, traj.energies)]
    writer.write_csv("energy.csv", dynamics.EnergyBreakdown.CSV_COLUMNS, energy_rows)
    writer.write_csv("trajectory.csv", integrator.Trajectory.CSV_COLUMNS, traj.csv_rows())

    totals = traj.totals()
    writer.write_svg(
        "energy.svg",
        [
            ("H(t)", list(traj.times), list(totals)),
            ("|y|_Q", list(traj.times), qnorms),
        ],
        "closed-loop energy decay",
        "t",
        "energy / norm",
        logy=True,
    )
    report = analysis.decay_metrics(traj)
    metrics = report.as_dict()
    metrics["h_flagged"] = bool(traj.h_flagged)
    metrics["h_increase_max"] = float(traj.h_increase_max)
    writer.summary(cfg.mode, cfg.seed, 0, metrics)
    return 0


def _mode_spectrum(cfg: RunConfig, writer: ArtifactWriter) -> int:
    loop = cfg.closed_loop()
    passed, payload = _run_certification(cfg, loop)
    writer.write_json("certification.json", payload)
    if not passed:
        writer.summary(cfg.mode, cfg.seed, 2, {"certification_passed": False})
        return 2
    sys_d = cfg.system()
    lin1 = linearize_block(loop.block_rotational)
    lin2 = linearize_block(loop.block_translational)
    g = analysis.assemble_linear_matrix(sys_d, loop, lin1, lin2)
    q = discretization.assemble_gram(sys_d, loop, lin1, lin2)
    report = analysis.spectrum(g, q)
    writer.write_csv("spectrum.csv", ("re", "im"), report.csv_rows())
    writer.summary(cfg.mode, cfg.seed, 0, report.as_dict())
    return 0


def _mode_skew(cfg: RunConfig, writer: ArtifactWriter) -> int:
    loop = cfg.closed_loop()
    sys_d = cfg.system()
    k1 = loop.sd_rotational.spring_slope
    k2 = loop.sd_translational.spring_slope
    defect = analysis.skew_check(sys_d, (k1, k2))
    writer.summary(cfg.mode, cfg.seed, 0, {
        "skew_defect": defect,
        "n_elements": cfg.n_elements,
        "spring_constants": [k1, k2],
    })
    return 0


def _mode_convergence(cfg: RunConfig, writer: ArtifactWriter) -> int:
    cfg.needs("meshes")
    beta1 = analysis.clamped_free_wavenumbers(cfg.beam.length, count=1)[0]
    omega_ref = beta1**2 * np.sqrt(cfg.beam.lambda_rigidity / cfg.beam.rho)
    rows = []
    prev = None
    for n in cfg.meshes:
        mesh = discretization.build_mesh(cfg.beam, n)
        sys_d = discretization.assemble(cfg.beam, mesh, clamp_left=True)
        omega = analysis.beam_frequencies(sys_d, count=1)[0]
        err = abs(omega - omega_ref) / omega_ref
        order = float("nan") if prev is None else np.log(prev[1] / err) / np.log(n / prev[0])
        rows.append((n, omega, omega_ref, err, order))
        prev = (n, err)
    writer.write_csv(
        "convergence.csv", ("n_elements", "omega", "omega_ref", "rel_error", "observed_order"), rows
    )
    metrics = {"omega_ref": float(omega_ref), "final_rel_error": float(rows[-1][3])}
    writer.summary(cfg.mode, cfg.seed, 0, metrics)
    return 0


_MODE_RUNNERS = {
    "certify": _mode_certify,
    "simulate": _mode_simulate,
    "spectrum": _mode_spectrum,
    "skew": _mode_skew,
    "convergence": _mode_convergence,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def load_config(path, mode: str, seed_override=None, out_override=None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config file: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(
            f"config parse error at line {exc.lineno} column {exc.colno}: {exc.msg}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    return RunConfig(raw, mode, seed_override=seed_override, out_override=out_override)


def run(mode: str, config_path, out=None, seed=None) -> int:
    """Load a config and dispatch one mode; returns the process exit status."""
    try:
        cfg = load_config(config_path, mode, seed_override=seed, out_override=out)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    writer = ArtifactWriter(cfg.output_dir)
    try:
        return _MODE_RUNNERS[mode](cfg, writer)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PassiveBeamError as exc:
        operation = type(exc).__name__
        print(f"numerical failure ({operation}): {exc}", file=sys.stderr)
        writer.summary(mode, cfg.seed, 3, {"error": str(exc), "operation": operation})
        return 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="passivebeam",
        description="Simulate and certify the beam with passive tip feedback.",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="sampling seed (overrides config)")
    args = parser.parse_args(argv)
    return run(args.mode, args.config, out=args.out, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
