"""Serialization helpers: matrix/field JSON forms, CSV tables, manifests.

All floats go through Python's shortest-representation repr in JSON and
through 17-significant-digit scientific notation in CSV, so written
files round-trip losslessly and byte-compare across reruns.  Manifests
carry no timestamps; reruns with the same resolved config are
byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .core import Unitary
from .dynamics import ControlField, Envelope, FieldComponent


def matrix_to_json(m) -> dict:
    """Row-major {rows, cols, re, im} form; accepts Unitary or ndarray."""
    a = m.matrix if isinstance(m, Unitary) else np.asarray(m, dtype=complex)
    return {
        "rows": a.shape[0],
        "cols": a.shape[1],
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


def matrix_from_json(d: dict) -> np.ndarray:
    rows, cols = d["rows"], d["cols"]
    re = np.array(d["re"], dtype=float).reshape(rows, cols)
    im = np.array(d["im"], dtype=float).reshape(rows, cols)
    return re + 1j * im


def field_to_json(f: ControlField) -> dict:
    params = {}
    if f.envelope.kind == "gaussian":
        params = {"center": f.envelope.center, "fwhm": f.envelope.fwhm}
    return {
        "envelope": {"kind": f.envelope.kind, "params": params},
        "components": [
            {"a": c.amplitude, "omega": c.frequency, "delta": c.phase}
            for c in f.components
        ],
        "t_final": f.t_final,
    }


def field_from_json(d: dict) -> ControlField:
    env = d["envelope"]
    envelope = Envelope(env["kind"], **env.get("params", {}))
    comps = tuple(
        FieldComponent(c["a"], c["omega"], c["delta"]) for c in d["components"]
    )
    return ControlField(envelope, comps, d["t_final"])


def record_to_json(record, config, version: str) -> dict:
    """Full optimization record: config echo, fidelity series, field, unitary."""
    cfg = config if isinstance(config, dict) else dataclasses.asdict(config)
    return {
        "version": version,
        "config": cfg,
        "best_fidelity": [float(x) for x in record.best_fidelity],
        "mean_fidelity": [float(x) for x in record.mean_fidelity],
        "best_field": field_to_json(record.best_field),
        "final_unitary": matrix_to_json(record.final_unitary),
        "total_propagations": record.total_propagations,
        "clamp_count": record.clamp_count,
    }


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def csv_float(x: float) -> str:
    """17 significant digits; enough to reconstruct the double exactly."""
    return f"{float(x):.16e}"


def write_csv(path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(csv_float(v) if isinstance(v, float) else str(v) for v in row)
        )
    Path(path).write_text("\n".join(lines) + "\n")


def sweep_to_csv(path, table) -> None:
    write_csv(
        path,
        ["T_kelvin", "delta", "eps_mle", "eps_sle", "eps_sle_oracle"],
        zip(
            map(float, table.temperatures),
            map(float, table.deltas),
            map(float, table.eps_mle),
            map(float, table.eps_sle),
            map(float, table.eps_sle_oracle),
        ),
    )


def merge_config(base: dict, override: dict) -> dict:
    """Recursive dict merge; override wins on leaves."""
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge_config(out[k], v)
        else:
            out[k] = v
    return out


def layered_config(builtin: dict, config_path=None, flag_overrides: dict | None = None) -> dict:
    """built-in defaults <- config file <- command-line flags."""
    cfg = dict(builtin)
    if config_path is not None:
        cfg = merge_config(cfg, read_json(config_path))
    if flag_overrides:
        cfg = merge_config(cfg, {k: v for k, v in flag_overrides.items() if v is not None})
    return cfg
