"""Parsers for the simulator's documented output formats.

Everything here reads files only -- the plotting package never imports the
simulation package.  Formats:

* diagnostics CSV: header ``t,mass,p1..pd,energy,entropy,l2,linf,min_f,
  wsup_<q>...``, one float row per tick.
* sharpness-scan CSV: header ``gamma,phi,ratio``.
* Landau-sweep CSV: header ``s,one_minus_s,op_gap[,...]``.
* snapshot pair: ``<prefix>.json`` metadata (d, n, L, t) and
  ``<prefix>.f64`` raw little-endian float64, row-major, length n^d.

All parse problems raise FormatError carrying the offending line number.
"""

from __future__ import annotations

import json
import os

import numpy as np


class FormatError(Exception):
    """Input file does not match the documented layout."""

    def __init__(self, message, path=None, line=None):
        loc = f"{path}:{line}" if line is not None else path
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


def read_csv(path: str, required: tuple = ()) -> dict:
    """Parse a float CSV with a named header into {column: array}."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FormatError(str(exc), path=path) from exc
    if not lines:
        raise FormatError("empty file", path=path, line=0)
    header = [c.strip() for c in lines[0].split(",")]
    for col in required:
        if col not in header:
            raise FormatError(f"missing column {col!r}", path=path, line=1)
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise FormatError(
                f"expected {len(header)} fields, got {len(parts)}", path=path, line=k
            )
        try:
            rows.append([float(x) for x in parts])
        except ValueError as exc:
            raise FormatError(str(exc), path=path, line=k) from exc
    if not rows:
        raise FormatError("no data rows", path=path, line=len(lines))
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def read_snapshot(prefix: str) -> tuple:
    """(metadata dict, values array of shape (n,)*d) from a snapshot pair."""
    meta_path = prefix + ".json"
    data_path = prefix + ".f64"
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except OSError as exc:
        raise FormatError(str(exc), path=meta_path) from exc
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, path=meta_path, line=exc.lineno) from exc
    for key in ("d", "n", "L"):
        if key not in meta:
            raise FormatError(f"missing metadata key {key!r}", path=meta_path, line=1)
    d, n = int(meta["d"]), int(meta["n"])
    if not os.path.exists(data_path):
        raise FormatError("missing data file", path=data_path)
    values = np.fromfile(data_path, dtype="<f8")
    if values.size != n**d:
        raise FormatError(
            f"expected {n**d} float64 values, found {values.size}", path=data_path
        )
    return meta, values.reshape((n,) * d)


def radial_profile(meta: dict, values: np.ndarray, n_bins: int = 48) -> tuple:
    """Angle-averaged profile: (bin centers, mean of values per |v| shell)."""
    d, n, L = int(meta["d"]), int(meta["n"]), float(meta["L"])
    axis = -L + (2.0 * L / n) * np.arange(n)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    radius = np.sqrt(sum(g**2 for g in grids)).ravel()
    flat = values.ravel()
    edges = np.linspace(0.0, L, n_bins + 1)
    which = np.clip(np.digitize(radius, edges) - 1, 0, n_bins - 1)
    inside = radius <= L
    sums = np.bincount(which[inside], weights=flat[inside], minlength=n_bins)
    counts = np.bincount(which[inside], minlength=n_bins)
    keep = counts > 0
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers[keep], sums[keep] / counts[keep]


def phi_crossing(gamma: np.ndarray, phi: np.ndarray) -> float:
    """Linearly interpolated gamma where phi crosses 1 (the sharpness root)."""
    signs = np.sign(phi - 1.0)
    flips = np.where(np.diff(signs) != 0)[0]
    if len(flips) == 0:
        raise FormatError("phi - 1 does not change sign in the scan")
    k = int(flips[0])
    g0, g1 = gamma[k], gamma[k + 1]
    p0, p1 = phi[k] - 1.0, phi[k + 1] - 1.0
    return float(g0 - p0 * (g1 - g0) / (p1 - p0))
