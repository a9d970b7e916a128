"""Deterministic run artifacts: hashed configs and CSV/JSON writers.

Every artifact opens with a metadata header carrying the sha256 hash of
the canonicalized run configuration and the package version, and never a
timestamp, so a rerun with the same configuration and seed reproduces
the output byte for byte.  Floats are written with ``repr`` (shortest
round-trip form); complex quantities are split into ``_re``/``_im``
column pairs so the files stay purely numeric.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json

import numpy as np

from . import __version__

__all__ = [
    "canonical_json",
    "config_hash",
    "artifact_header",
    "render_csv",
    "write_csv",
    "render_json",
    "write_json",
    "complex_columns",
    "complex_cells",
    "particle_table",
    "field_table",
    "run_metadata",
]


def _jsonable(value):
    """Map numpy scalars/arrays and complex numbers onto plain JSON types."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.complexfloating, complex)):
        c = complex(value)
        if c.imag == 0.0:
            return c.real
        return {"re": c.real, "im": c.imag}
    return value


def canonical_json(obj) -> str:
    """Sorted-key, separator-normalized JSON used for hashing and headers."""
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def artifact_header(config: dict) -> dict:
    return {"config_hash": config_hash(config), "version": __version__}


# ---- CSV ------------------------------------------------------------------------


def _cell(value) -> str:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def render_csv(config: dict, columns: list, rows) -> str:
    """CSV text with a ``# {json}`` metadata header line."""
    buf = io.StringIO()
    buf.write("# " + canonical_json(artifact_header(config)) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, config: dict, columns: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(render_csv(config, columns, rows))


def render_json(config: dict, payload: dict) -> str:
    doc = dict(artifact_header(config))
    doc.update(_jsonable(payload))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_json(path, config: dict, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(render_json(config, payload))


# ---- column helpers ---------------------------------------------------------------


def complex_columns(stem: str, count: int | None = None) -> list:
    """Column names ``stem_re``/``stem_im`` (indexed when count is given)."""
    if count is None:
        return [f"{stem}_re", f"{stem}_im"]
    cols = []
    for i in range(count):
        cols += [f"{stem}{i}_re", f"{stem}{i}_im"]
    return cols


def complex_cells(values) -> list:
    cells = []
    for v in np.atleast_1d(np.asarray(values, dtype=complex)):
        cells += [float(v.real), float(v.imag)]
    return cells


# ---- trajectory tables -----------------------------------------------------------


def particle_table(traj) -> tuple[list, list]:
    """(columns, rows) for a point-particle trajectory.

    Columns: time, the four group-matrix entries of u, the dual momentum
    coefficients p, the Hamiltonian, the conserved charge Q_G and the
    moment-map values over the double basis, each as re/im pairs.
    """
    n = traj.ps.shape[1]
    n2 = traj.moments.shape[1]
    columns = (
        ["t"]
        + complex_columns("u", 4)
        + complex_columns("p", n)
        + complex_columns("H")
        + complex_columns("Q_G", n)
        + complex_columns("I_delta", n2)
    )
    rows = []
    for j, t in enumerate(traj.times):
        rows.append(
            [float(t)]
            + complex_cells(traj.us[j].reshape(-1))
            + complex_cells(traj.ps[j])
            + complex_cells(traj.hams[j])
            + complex_cells(traj.charges_g[j])
            + complex_cells(traj.moments[j])
        )
    return columns, rows


def field_table(traj) -> tuple[list, list]:
    """(columns, rows) for a loop-field trajectory.

    Columns: time, total Hamiltonian, the two field-equation residuals,
    the two-description Hamiltonian gap, the moment-map values over the
    double basis and the quadratic loop function f_d.
    """
    n2 = traj.moments.shape[1]
    columns = (
        ["t"]
        + complex_columns("H_total")
        + ["eom_res_g", "eom_res_dual", "duality_gap"]
        + complex_columns("I_delta", n2)
        + complex_columns("f_d")
    )
    rows = []
    for j, t in enumerate(traj.times):
        rows.append(
            [float(t)]
            + complex_cells(traj.hamiltonians[j])
            + [float(traj.eom_residuals_g[j]), float(traj.eom_residuals_dual[j])]
            + [float(traj.duality_gaps[j])]
            + complex_cells(traj.moments[j])
            + complex_cells(traj.f_d[j])
        )
    return columns, rows


def run_metadata(config: dict, extra: dict | None = None) -> dict:
    """Metadata payload describing a run: the resolved configuration plus
    any run summary values (final drifts, completion flag, ...)."""
    doc = {"config": config}
    if extra:
        doc.update(extra)
    return doc
