"""Command-line interface for the simulator.

Subcommands
-----------

* ``validate``  -- structural residual report for one preset (JSON).
* ``particle``  -- integrate the point-particle reduction, write a CSV
  trajectory and an optional metadata JSON.
* ``field``     -- integrate the loop field, write the diagnostic CSV.
* ``duality``   -- factorize a seeded loop both ways and report the gap
  between the two Hamiltonian descriptions.
* ``sweep``     -- run several seeded replicas of one command
  concurrently and write a single manifest for the whole batch.
* ``limits``    -- slope fits of the two limiting families against their
  closed-form targets.

Every subcommand accepts ``--config FILE`` with a JSON object of
options; explicit command-line flags override the file.  The random
seed defaults to 0 and all outputs are byte-identical for a fixed
configuration.  Exit codes: 0 success, 2 configuration error (with a
machine-readable JSON error document on stderr), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bialgebra import (
    build_double,
    cocycle_residual,
    cybe_residual,
    double_iso_lr,
    dual_algebra,
    pairing_ad_invariance_residual,
    symmetric_part_invariance_residual,
)
from .duality import (
    GraphBlowupError,
    SplittingError,
    dual_graph_at,
    graph_at,
    lagrangian,
    splitting,
)
from .fieldsim import (
    duality_check,
    init_pointlike,
    integrate_field,
    random_smooth_loop,
)
from .groups import FactorizationError, GroupKit
from .liecore import bracket_coeffs, jacobi_residual
from .models import ALGEBRA_NAMES, PRESET_NAMES, make_preset
from .particle import integrate_particle
from .reporting import (
    config_hash,
    field_table,
    particle_table,
    render_json,
    run_metadata,
    write_csv,
    write_json,
)

__all__ = ["main", "run", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """A run configuration that cannot be executed."""


# ---- configuration ----------------------------------------------------------------

_COMMON_DEFAULTS = {
    "preset": "modified-principal",
    "algebra": "su2",
    "lam": None,
    "mu": None,
    "seed": 0,
    "output": None,
    "metadata": None,
}

_DEFAULTS = {
    "validate": {**_COMMON_DEFAULTS, "samples": 5},
    "particle": {
        **_COMMON_DEFAULTS,
        "dt": 1e-3,
        "T": 1.0,
        "record_every": 1,
        "u0_log": None,
        "p0": None,
    },
    "field": {
        **_COMMON_DEFAULTS,
        "N": 64,
        "dt": 2.5e-3,
        "T": 1.0,
        "boundary": "periodic",
        "amplitude": 0.1,
        "record_every": 10,
        "pointlike": False,
    },
    "duality": {**_COMMON_DEFAULTS, "N": 32, "amplitude": 0.3, "boundary": "periodic"},
    "sweep": {
        "command": "field",
        "replicas": 4,
        "output_dir": ".",
        "base": {},
        "max_workers": 4,
    },
    "limits": {
        "algebra": "su2",
        "mus": [10.0, 100.0, 1000.0],
        "samples": 10,
        "seed": 0,
        "output": None,
    },
}


def _merge_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS[command])
    file_path = getattr(args, "config", None)
    if file_path:
        try:
            with open(file_path) as fh:
                loaded = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {file_path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in loaded.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key for '{command}': {key}")
            cfg[key] = value
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _parse_vector(text) -> np.ndarray | None:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return np.array([complex(v) for v in text])
    try:
        return np.array([complex(part) for part in str(text).split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse vector: {text!r}")


def _build_preset(cfg: dict):
    algebra = cfg.get("algebra", "su2")
    name = cfg.get("preset", "modified-principal")
    if algebra not in ALGEBRA_NAMES:
        raise ConfigError(f"unknown algebra '{algebra}' (choose from {ALGEBRA_NAMES})")
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset '{name}' (choose from {PRESET_NAMES})")
    lam = cfg.get("lam")
    mu = cfg.get("mu")
    try:
        preset = make_preset(
            name,
            algebra=algebra,
            lam=None if lam is None else complex(lam),
            mu=None if mu is None else complex(mu),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    if not preset.is_factorisable():
        raise ConfigError(
            f"degenerate splitting: lam + 1 + 2 mu = {preset.split_denominator:.3e}"
        )
    return preset


def _positive(cfg: dict, key: str) -> float:
    value = cfg.get(key)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' must be a number, got {cfg.get(key)!r}")
    if value <= 0:
        raise ConfigError(f"'{key}' must be positive, got {value}")
    return value


def _emit(cfg: dict, text: str) -> None:
    path = cfg.get("output")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---- validate ---------------------------------------------------------------------


def _chiral_iso_defects(double) -> tuple[float, float]:
    """(morphism defect, pairing-transport defect) of the chiral isomorphism."""
    op, form = double_iso_lr(double)
    d = double.algebra
    mat = op.matrix
    eye = np.eye(d.dim)
    worst = 0.0
    for i in range(d.dim):
        for j in range(d.dim):
            lhs = mat @ bracket_coeffs(d.c, eye[i], eye[j])
            rhs = bracket_coeffs(op.target.c, mat[:, i], mat[:, j])
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    pairing_defect = float(
        np.max(np.abs(mat.T @ form.matrix @ mat - double.pairing.matrix))
    )
    return worst, pairing_defect


def validation_report(preset, samples: int = 5, seed: int = 0) -> dict:
    """All structural residuals for one preset, as a flat name -> value map."""
    b = preset.bialgebra
    double = build_double(b)
    split = splitting(preset)
    kit = GroupKit(b)
    iso_morphism, iso_pairing = _chiral_iso_defects(double)
    rng = np.random.default_rng(seed)
    route_gap = 0.0
    for _ in range(samples):
        u = kit.exp_g(rng.normal(size=b.g.dim) * 0.5)
        graphs = [graph_at(kit, split, u, route=r) for r in
                  ("transport", "invariant-split", "cocycle")]
        for g2 in graphs[1:]:
            route_gap = max(
                route_gap,
                float(np.max(np.abs(graphs[0].e_inv - g2.e_inv))),
                float(np.max(np.abs(graphs[0].t_inv - g2.t_inv))),
            )
    diag_plus, diag_minus = split.diagonal_pairing_defects()
    residuals = {
        "cybe": cybe_residual(b.g, b.rho),
        "symmetric_part_invariance": symmetric_part_invariance_residual(b.g, b.rho),
        "cobracket_cocycle": cocycle_residual(b),
        "dual_jacobi": jacobi_residual(dual_algebra(b)),
        "double_jacobi": jacobi_residual(double.algebra),
        "pairing_ad_invariance": pairing_ad_invariance_residual(double),
        "chiral_iso_morphism": iso_morphism,
        "chiral_iso_pairing": iso_pairing,
        "splitting_orthogonality": split.orthogonality_defect(),
        "splitting_diagonal_plus": diag_plus,
        "splitting_diagonal_minus": diag_minus,
        "splitting_projectors": split.projector_defects(),
        "graph_route_agreement": route_gap,
    }
    n = b.g.dim
    return {
        "preset": preset.name,
        "algebra": b.g.name,
        "lam": preset.lam,
        "mu": preset.mu,
        "split_denominator": preset.split_denominator,
        "subspace_rank_plus": int(np.linalg.matrix_rank(split.basis_plus)),
        "subspace_rank_minus": int(np.linalg.matrix_rank(split.basis_minus)),
        "expected_rank": n,
        "residuals": residuals,
        "max_residual": max(residuals.values()),
    }


def run_validate(cfg: dict) -> int:
    preset = _build_preset(cfg)
    report = validation_report(preset, samples=int(cfg.get("samples", 5)),
                               seed=int(cfg.get("seed", 0)))
    ok = report["max_residual"] < 1e-10
    report["passed"] = bool(ok)
    _emit(cfg, render_json(_public_config(cfg), report))
    return EXIT_OK if ok else EXIT_NUMERICAL


# ---- particle ---------------------------------------------------------------------


def run_particle(cfg: dict) -> int:
    preset = _build_preset(cfg)
    dt = _positive(cfg, "dt")
    horizon = _positive(cfg, "T")
    n_steps = int(round(horizon / dt))
    if n_steps < 1:
        raise ConfigError("T must cover at least one step")
    kit = GroupKit(preset.bialgebra)
    split = splitting(preset)
    n = preset.bialgebra.g.dim
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    u0_log = _parse_vector(cfg.get("u0_log"))
    p0 = _parse_vector(cfg.get("p0"))
    if u0_log is None:
        u0_log = rng.normal(size=n) * 0.3
    if p0 is None:
        p0 = rng.normal(size=n) * 0.4
    if len(u0_log) != n or len(p0) != n:
        raise ConfigError(f"u0_log and p0 must have {n} components")
    u0 = kit.exp_g(np.asarray(u0_log))
    traj = integrate_particle(
        kit, split, u0, np.asarray(p0), dt, n_steps,
        record_every=int(cfg.get("record_every", 1)),
    )
    columns, rows = particle_table(traj)
    if cfg.get("output"):
        write_csv(cfg["output"], _public_config(cfg), columns, rows)
    else:
        from .reporting import render_csv

        sys.stdout.write(render_csv(_public_config(cfg), columns, rows))
    summary = {
        "completed": traj.completed,
        "hamiltonian_drift": float(np.max(np.abs(traj.hams - traj.hams[0]))),
        "charge_drift": float(np.max(np.abs(traj.charges_g - traj.charges_g[0]))),
        "steps": n_steps,
    }
    if cfg.get("metadata"):
        write_json(cfg["metadata"], _public_config(cfg), run_metadata(_public_config(cfg), {"summary": summary}))
    return EXIT_OK if traj.completed else EXIT_NUMERICAL


# ---- field ------------------------------------------------------------------------


def _public_config(cfg: dict) -> dict:
    """Configuration without output locations, so artifact hashes depend
    only on what was computed, not where it was written."""
    return {k: v for k, v in cfg.items() if k not in ("output", "metadata", "config")}


def _field_state(cfg: dict, preset, kit, split):
    n_cells = int(cfg.get("N", 64))
    if n_cells < 8:
        raise ConfigError("N must be at least 8")
    boundary = cfg.get("boundary", "periodic")
    if boundary not in ("periodic", "double-neumann"):
        raise ConfigError(f"unknown boundary '{boundary}'")
    if cfg.get("pointlike"):
        n = preset.bialgebra.g.dim
        rng = np.random.default_rng(int(cfg.get("seed", 0)))
        u0 = kit.exp_g(rng.normal(size=n) * 0.3)
        p = rng.normal(size=n) * float(cfg.get("amplitude", 0.1))
        if kit.flavor == "su2":
            p = -1j * p
        return init_pointlike(kit, split, u0, p, n_cells, boundary=boundary)
    return random_smooth_loop(
        kit,
        split,
        n_cells,
        boundary=boundary,
        seed=int(cfg.get("seed", 0)),
        amplitude=float(cfg.get("amplitude", 0.1)),
    )


def run_field(cfg: dict) -> int:
    preset = _build_preset(cfg)
    dt = _positive(cfg, "dt")
    horizon = _positive(cfg, "T")
    n_steps = int(round(horizon / dt))
    if n_steps < 1:
        raise ConfigError("T must cover at least one step")
    kit = GroupKit(preset.bialgebra)
    split = splitting(preset)
    state = _field_state(cfg, preset, kit, split)
    traj = integrate_field(
        state,
        dt,
        n_steps,
        record_every=int(cfg.get("record_every", 10)),
        with_duality=True,
        with_residuals=True,
    )
    columns, rows = field_table(traj)
    if cfg.get("output"):
        write_csv(cfg["output"], _public_config(cfg), columns, rows)
    else:
        from .reporting import render_csv

        sys.stdout.write(render_csv(_public_config(cfg), columns, rows))
    hams = np.abs(traj.hamiltonians)
    summary = {
        "completed": traj.completed,
        "hamiltonian_rel_drift": float(
            np.max(np.abs(traj.hamiltonians - traj.hamiltonians[0])) / max(hams[0], 1e-300)
        ),
        "max_duality_gap": float(np.nanmax(traj.duality_gaps)),
        "steps": n_steps,
    }
    if cfg.get("metadata"):
        write_json(cfg["metadata"], _public_config(cfg), run_metadata(_public_config(cfg), {"summary": summary}))
    return EXIT_OK if traj.completed else EXIT_NUMERICAL


# ---- duality ----------------------------------------------------------------------


def run_duality(cfg: dict) -> int:
    preset = _build_preset(cfg)
    kit = GroupKit(preset.bialgebra)
    split = splitting(preset)
    state = _field_state(cfg, preset, kit, split)
    gap = duality_check(state)
    report = {
        "preset": preset.name,
        "algebra": preset.bialgebra.g.name,
        "n_cells": state.n_cells,
        "boundary": state.boundary,
        "duality_gap": gap,
        "passed": bool(gap < 1e-9),
    }
    _emit(cfg, render_json(_public_config(cfg), report))
    return EXIT_OK if report["passed"] else EXIT_NUMERICAL


# ---- sweep ------------------------------------------------------------------------


def _sweep_one(command: str, base: dict, seed: int, output_dir: str) -> dict:
    cfg = dict(_DEFAULTS[command])
    for key, value in base.items():
        if key not in cfg:
            raise ConfigError(f"unknown config key for '{command}': {key}")
        cfg[key] = value
    cfg["seed"] = seed
    stem = f"{command}_seed{seed}"
    if command in ("particle", "field"):
        cfg["output"] = f"{output_dir}/{stem}.csv"
        cfg["metadata"] = f"{output_dir}/{stem}.json"
    else:
        cfg["output"] = f"{output_dir}/{stem}.json"
    code = _RUNNERS[command](cfg)
    return {
        "seed": seed,
        "exit_code": code,
        "config_hash": config_hash(_public_config(cfg)),
        "files": [v for k, v in cfg.items() if k in ("output", "metadata") and v],
    }


def run_sweep(cfg: dict) -> int:
    command = cfg.get("command", "field")
    if command not in ("validate", "particle", "field", "duality"):
        raise ConfigError(f"sweep cannot drive command '{command}'")
    replicas = int(cfg.get("replicas", 4))
    if replicas < 1:
        raise ConfigError("replicas must be at least 1")
    base = cfg.get("base", {})
    if not isinstance(base, dict):
        raise ConfigError("'base' must be a JSON object of command options")
    output_dir = str(cfg.get("output_dir", "."))
    workers = max(1, int(cfg.get("max_workers", 4)))
    # replicas run concurrently and write only their own files; the
    # manifest is assembled and written once by this (single) writer
    with ThreadPoolExecutor(max_workers=workers) as pool:
        entries = list(
            pool.map(
                lambda s: _sweep_one(command, base, s, output_dir), range(replicas)
            )
        )
    manifest = {
        "command": command,
        "replicas": replicas,
        "base": base,
        "runs": sorted(entries, key=lambda e: e["seed"]),
    }
    write_json(f"{output_dir}/manifest.json", _public_config(cfg), manifest)
    worst = max(e["exit_code"] for e in entries)
    return EXIT_OK if worst == EXIT_OK else EXIT_NUMERICAL


# ---- limits -----------------------------------------------------------------------


def limit_slopes(algebra: str = "su2", mus=(10.0, 100.0, 1000.0), samples: int = 10,
                 seed: int = 0) -> dict:
    """Deviation slope fits for the two limiting families.

    Primal: with the limiting preset the Lagrangian approaches the
    bi-invariant-metric form x_minus K x_plus, with deviation O(1/mu).
    Dual: in coordinates scaled by the dual scale c the dual Lagrangian,
    rescaled by 1/c^4, approaches 2 t_plus . t_minus, again O(1/mu).
    """
    mus = [float(m) for m in mus]
    base = make_preset("modified-principal", algebra=algebra).bialgebra
    k_mat = np.linalg.inv(base.kinv_matrix)
    devs_primal, devs_dual = [], []
    for mu in mus:
        preset = make_preset("principal-limit", algebra=algebra, mu=mu)
        kit = GroupKit(preset.bialgebra)
        split = splitting(preset)
        worst = 0.0
        rng = np.random.default_rng(seed + 2)
        for _ in range(samples):
            u = kit.exp_g(rng.normal(size=3) * 0.5)
            xp = rng.normal(size=3) + 1j * rng.normal(size=3)
            xm = rng.normal(size=3) + 1j * rng.normal(size=3)
            lag = lagrangian(kit, split, u, xp, xm)
            ref = xm @ (k_mat @ xp)
            worst = max(worst, abs(lag - ref) / abs(ref))
        devs_primal.append(worst)
        c = kit.dual_scale
        worst = 0.0
        rng = np.random.default_rng(seed + 3)
        for _ in range(samples):
            tvec = rng.normal(size=3) * 0.3
            tp = rng.normal(size=3)
            tm = rng.normal(size=3)
            svec = c * tvec
            t = kit.su2star_from_vector(svec)
            phi_p = -1j * c * kit.su2star_nabla(svec, c * tp)
            phi_m = -1j * c * kit.su2star_nabla(svec, c * tm)
            dual_graph = dual_graph_at(kit, split, t)
            lag = phi_p @ (dual_graph.e_bar_matrix() @ phi_m)
            ref = 2.0 * tp @ tm
            worst = max(worst, abs(lag / c**4 - ref) / abs(ref))
        devs_dual.append(worst)
    log_mu = np.log(mus)
    slope_primal = float(np.polyfit(log_mu, np.log(devs_primal), 1)[0])
    slope_dual = float(np.polyfit(log_mu, np.log(devs_dual), 1)[0])
    return {
        "mus": mus,
        "deviations_primal": devs_primal,
        "deviations_dual": devs_dual,
        "slope_primal": slope_primal,
        "slope_dual": slope_dual,
        "passed": bool(
            abs(slope_primal + 1.0) < 0.2 and abs(slope_dual + 1.0) < 0.2
        ),
    }


def run_limits(cfg: dict) -> int:
    algebra = cfg.get("algebra", "su2")
    if algebra != "su2":
        raise ConfigError("the limits command supports the compact algebra only")
    mus = cfg.get("mus", [10.0, 100.0, 1000.0])
    if isinstance(mus, str):
        mus = [float(v) for v in mus.split(",")]
    if len(mus) < 2:
        raise ConfigError("need at least two mu values for a slope fit")
    report = limit_slopes(
        algebra=algebra,
        mus=mus,
        samples=int(cfg.get("samples", 10)),
        seed=int(cfg.get("seed", 0)),
    )
    _emit(cfg, render_json(_public_config(cfg), report))
    return EXIT_OK if report["passed"] else EXIT_NUMERICAL


_RUNNERS = {
    "validate": run_validate,
    "particle": run_particle,
    "field": run_field,
    "duality": run_duality,
    "sweep": run_sweep,
    "limits": run_limits,
}


# ---- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # machine-readable instead of usage dump
        raise ConfigError(message)


def _add_common(sub):
    sub.add_argument("--config", help="JSON file of options (flags override)")
    sub.add_argument("--preset", help="model preset name")
    sub.add_argument("--algebra", help="base algebra (su2 or sl2r)")
    sub.add_argument("--lam", help="custom splitting parameter lambda")
    sub.add_argument("--mu", help="custom splitting parameter mu")
    sub.add_argument("--seed", type=int, help="random seed (default 0)")
    sub.add_argument("--output", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pltdual", description=__doc__.split("\n")[0])
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sv = subs.add_parser("validate", help="structural residual report")
    _add_common(sv)
    sv.add_argument("--samples", type=int, help="random group points to test")

    sp = subs.add_parser("particle", help="point-particle trajectory CSV")
    _add_common(sp)
    sp.add_argument("--dt", type=float, help="time step")
    sp.add_argument("--T", type=float, help="time horizon")
    sp.add_argument("--record-every", dest="record_every", type=int)
    sp.add_argument("--u0-log", dest="u0_log", help="comma-separated log of u(0)")
    sp.add_argument("--p0", help="comma-separated initial momentum")
    sp.add_argument("--metadata", help="metadata JSON output path")

    sf = subs.add_parser("field", help="loop-field diagnostics CSV")
    _add_common(sf)
    sf.add_argument("--N", type=int, help="number of grid cells")
    sf.add_argument("--dt", type=float, help="time step")
    sf.add_argument("--T", type=float, help="time horizon")
    sf.add_argument("--boundary", help="periodic or double-neumann")
    sf.add_argument("--amplitude", type=float, help="initial-data amplitude")
    sf.add_argument("--record-every", dest="record_every", type=int)
    sf.add_argument("--pointlike", action="store_const", const=True,
                    help="x-independent group factor initial data")
    sf.add_argument("--metadata", help="metadata JSON output path")

    sd = subs.add_parser("duality", help="two-description Hamiltonian gap")
    _add_common(sd)
    sd.add_argument("--N", type=int, help="number of grid cells")
    sd.add_argument("--amplitude", type=float, help="initial-data amplitude")
    sd.add_argument("--boundary", help="periodic or double-neumann")

    sw = subs.add_parser("sweep", help="concurrent seeded replicas + manifest")
    sw.add_argument("--config", help="JSON file of options (flags override)")
    sw.add_argument("--command", dest="sweep_command", help="command to replicate")
    sw.add_argument("--replicas", type=int, help="number of seeds (0..R-1)")
    sw.add_argument("--output-dir", dest="output_dir", help="directory for artifacts")
    sw.add_argument("--max-workers", dest="max_workers", type=int)

    sl = subs.add_parser("limits", help="limiting-family slope report")
    sl.add_argument("--config", help="JSON file of options (flags override)")
    sl.add_argument("--algebra", help="base algebra (su2)")
    sl.add_argument("--mus", help="comma-separated mu values")
    sl.add_argument("--samples", type=int, help="random samples per mu")
    sl.add_argument("--seed", type=int, help="random seed (default 0)")
    sl.add_argument("--output", help="output path (default stdout)")
    return parser


def _error_json(kind: str, message: str) -> str:
    return json.dumps({"error": {"kind": kind, "message": message}}) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "sweep_command", None) is not None:
            args.command = args.sweep_command
        cfg = _merge_config(args.subcommand, args)
        return _RUNNERS[args.subcommand](cfg)
    except ConfigError as exc:
        sys.stderr.write(_error_json("config", str(exc)))
        return EXIT_CONFIG
    except SplittingError as exc:
        sys.stderr.write(_error_json("config", str(exc)))
        return EXIT_CONFIG
    except (FactorizationError, GraphBlowupError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(_error_json("numerical", str(exc)))
        return EXIT_NUMERICAL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
