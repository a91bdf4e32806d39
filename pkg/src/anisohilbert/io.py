"""Serialisation: JSON reports with a schema version and config echo, CSV fields."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "anisohilbert/1"


def _plain(obj):
    """Recursively convert numpy scalars/arrays and complex numbers for JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(float(obj.real)), _plain(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def dumps_report(payload: dict, config: dict) -> str:
    """Deterministic JSON: sorted keys, schema version and the run config echoed."""
    body = {"schema": SCHEMA_VERSION, "config": _plain(config), **_plain(payload)}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_report(path, payload: dict, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(payload, config))
    return path


def write_field_csv(path, coords, values, meta: dict, config: dict) -> tuple:
    """One row per grid point: coordinates, then real and imaginary parts.

    ``coords`` is a list of 1-d axes; ``values`` has shape
    ``tuple(len(a) for a in coords) + (C,)`` or without the trailing axis.
    A JSON sidecar ``<path>.json`` carries ``meta`` and the config.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values)
    grid_shape = tuple(len(a) for a in coords)
    if values.shape == grid_shape:
        values = values[..., None]
    C = values.shape[-1]
    mesh = np.meshgrid(*coords, indexing="ij")
    flat_x = np.stack([m.ravel() for m in mesh], axis=-1)
    flat_v = values.reshape(-1, C)
    names = [f"x{i + 1}" for i in range(len(coords))]
    if C == 1:
        vnames = ["re", "im"]
    else:
        vnames = [f"{p}{c}" for c in range(C) for p in ("re", "im")]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + vnames)
        for x, v in zip(flat_x, flat_v):
            row = [repr(float(c)) for c in x]
            for c in v:
                row += [repr(float(np.real(c))), repr(float(np.imag(c)))]
            w.writerow(row)
    side = path.with_suffix(path.suffix + ".json")
    write_report(side, {"field": meta, "columns": names + vnames}, config)
    return path, side


def read_field_csv(path):
    """Inverse of :func:`write_field_csv`: ``(axes, complex values, sidecar dict)``."""
    path = Path(path)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    nx = sum(1 for h in header if h.startswith("x"))
    axes = [np.unique(data[:, i]) for i in range(nx)]
    vals = data[:, nx::2] + 1j * data[:, nx + 1::2]
    vals = vals.reshape(tuple(len(a) for a in axes) + (vals.shape[-1],))
    side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    return axes, vals, side


def write_points_csv(path, xi, eta, values, meta: dict, config: dict) -> tuple:
    """Scattered ``(xi, eta)`` samples as columns ``xi,eta,re,im`` plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values, dtype=complex)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "eta", "re", "im"])
        for x, y, v in zip(np.ravel(xi), np.ravel(eta), values.ravel()):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(v.real)), repr(float(v.imag))])
    side = path.with_suffix(path.suffix + ".json")
    write_report(side, {"field": meta, "columns": ["xi", "eta", "re", "im"]}, config)
    return path, side
