"""Uniform tensor velocity grids, sampled density fields, and diagnostics.

The velocity box is [-L, L)^d with n (even) nodes per axis at v_i = -L + i h,
h = 2L/n, so the origin is always a node.  Integrals use the midpoint rule
sum(values) * h^d, which for the periodic-by-convention box is also the
spectrally consistent quadrature.

Snapshot format (external interface): a pair of files
  <name>.json  -- {"d", "n", "L", "t", "params": {"d", "gamma", "s"}}
  <name>.f64   -- raw little-endian IEEE-754 binary64, row-major, length n^d
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ModelParams
from .errors import DomainError, FileFormatError


@dataclass(frozen=True)
class Grid:
    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise DomainError(f"d must be 1, 2 or 3, got {self.d!r}")
        if self.n < 8 or self.n % 2:
            raise DomainError(f"n must be even and >= 8, got {self.n!r}")
        if not self.L > 0:
            raise DomainError(f"L must be positive, got {self.L!r}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    def coords(self) -> tuple:
        """d broadcastable coordinate arrays (sparse meshgrid)."""
        return np.meshgrid(*([self.axis()] * self.d), indexing="ij", sparse=True)

    def radius2(self) -> np.ndarray:
        r2 = np.zeros(self.shape)
        for c in self.coords():
            r2 = r2 + c**2
        return r2

    def node(self, index) -> np.ndarray:
        return np.asarray([-self.L + self.h * i for i in index])


@dataclass
class Field:
    """A real density sampled on a Grid (row-major values, shape grid.shape)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise DomainError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    momentum: np.ndarray
    energy: float
    entropy: float
    l2: float
    linf: float
    min_f: float
    wsup: dict = field(default_factory=dict)  # q -> ||f||_{L^inf_q}


def zeros(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.shape))


def gaussian(grid: Grid, mass: float, center, variance: float) -> Field:
    """mass * (2 pi var)^{-d/2} exp(-|v-c|^2 / (2 var)) sampled at nodes."""
    if not variance > 0:
        raise DomainError(f"variance must be positive, got {variance!r}")
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.d,))
    r2 = np.zeros(grid.shape)
    for c, c0 in zip(grid.coords(), center):
        r2 = r2 + (c - c0) ** 2
    norm = mass * (2.0 * math.pi * variance) ** (-grid.d / 2.0)
    return Field(grid, norm * np.exp(-r2 / (2.0 * variance)))


def gaussian_profile(mass: float, center, variance: float, d: int):
    """Smooth point evaluator for the same profile ``gaussian`` samples.

    Returns a callable mapping points of shape (m, d) to values; used where
    an analytic (kink-free) field evaluation is needed, e.g. by the
    Monte-Carlo collision oracle.
    """
    if not variance > 0:
        raise DomainError(f"variance must be positive, got {variance!r}")
    center = np.broadcast_to(np.asarray(center, dtype=float), (d,)).copy()
    norm = mass * (2.0 * math.pi * variance) ** (-d / 2.0)

    def evaluate(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        r2 = ((pts - center[None, :]) ** 2).sum(axis=1)
        return norm * np.exp(-r2 / (2.0 * variance))

    return evaluate


def build_field(grid: Grid, ic) -> Field:
    """Realize an initial-condition spec on the grid.

    ``ic`` is a dict: {"kind": "gaussian", "mass", "center", "variance"},
    {"kind": "sum", "terms": [gaussian specs]}, or {"kind": "file", "path"}.
    """
    kind = ic.get("kind")
    if kind == "gaussian":
        return gaussian(grid, ic.get("mass", 1.0), ic.get("center", 0.0), ic.get("variance", 1.0))
    if kind == "sum":
        out = np.zeros(grid.shape)
        for term in ic["terms"]:
            out += gaussian(
                grid, term.get("mass", 1.0), term.get("center", 0.0), term.get("variance", 1.0)
            ).values
        return Field(grid, out)
    if kind == "file":
        f, meta = load_snapshot(ic["path"])
        if f.grid != grid:
            raise FileFormatError(
                f"snapshot grid {f.grid} does not match requested grid {grid}"
            )
        return f
    if kind == "zero":
        return zeros(grid)
    raise DomainError(f"unknown ic kind {kind!r}")


def odd_moment_axis(grid: Grid) -> np.ndarray:
    """Node coordinates with the unpaired -L face weighted 0 for odd moments.

    On the periodic box the i = 0 node is shared between -L and +L; symmetric
    outflow lands on it from both sides, so its symmetrized coordinate for
    odd moments is (+L - L)/2 = 0.  Without this the first moment of an even
    field picks up a spurious -L * (face mass) term.
    """
    ax = grid.axis().copy()
    ax[0] = 0.0
    return ax


def diagnostics(f: Field, t: float, q_list=()) -> DiagnosticsRecord:
    """Midpoint-rule moments, entropy, norms of one time slice.

    Entropy uses the convention 0 log 0 = 0; values <= 0 contribute nothing
    (the solver may undershoot slightly) and show up in min_f instead.
    Momentum uses the symmetrized odd-moment coordinate (see
    ``odd_moment_axis``).
    """
    g = f.grid
    hd = g.h**g.d
    vals = f.values
    mass = float(vals.sum() * hd)
    ax = odd_moment_axis(g)
    momentum = np.empty(g.d)
    for axis in range(g.d):
        shape = [1] * g.d
        shape[axis] = g.n
        momentum[axis] = float((ax.reshape(shape) * vals).sum() * hd)
    energy = float((g.radius2() * vals).sum() * hd)
    pos = vals[vals > 0.0]
    entropy = float((pos * np.log(pos)).sum() * hd)
    l2 = float(math.sqrt((vals**2).sum() * hd))
    linf = float(np.abs(vals).max())
    min_f = float(vals.min())
    bracket = np.sqrt(1.0 + g.radius2())
    wsup = {float(q): float((bracket**q * np.abs(vals)).max()) for q in q_list}
    return DiagnosticsRecord(
        t=t,
        mass=mass,
        momentum=momentum,
        energy=energy,
        entropy=entropy,
        l2=l2,
        linf=linf,
        min_f=min_f,
        wsup=wsup,
    )


def interpolate(f: Field, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a field at arbitrary points; 0 outside.

    ``points`` has shape (m, d).  Points beyond the node hull
    [-L, L - h]^d evaluate to 0 (the field is treated as compactly
    supported on the box).
    """
    g = f.grid
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    x = (pts + g.L) / g.h  # fractional node index
    inside = np.all((x >= 0.0) & (x <= g.n - 1), axis=1)
    xi = np.clip(x, 0.0, g.n - 1 - 1e-12)
    i0 = np.floor(xi).astype(np.int64)
    frac = xi - i0
    out = np.zeros(len(pts))
    flat = f.values.ravel()
    # accumulate over the 2^d hypercube corners
    for corner in range(1 << g.d):
        w = np.ones(len(pts))
        idx = np.zeros(len(pts), dtype=np.int64)
        for axis in range(g.d):
            bit = (corner >> axis) & 1
            ia = i0[:, axis] + bit
            w = w * (frac[:, axis] if bit else (1.0 - frac[:, axis]))
            idx = idx * g.n + ia
        out += w * flat[idx]
    out[~inside] = 0.0
    return out


def save_snapshot(f: Field, prefix: str, t: float, params: ModelParams | None = None) -> None:
    meta = {"d": f.grid.d, "n": f.grid.n, "L": f.grid.L, "t": t}
    if params is not None:
        meta["params"] = {"d": params.d, "gamma": params.gamma, "s": params.s}
    with open(prefix + ".json", "w") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    f.values.astype("<f8").tofile(prefix + ".f64")


def load_snapshot(prefix: str):
    """Read a snapshot pair; returns (Field, metadata dict)."""
    try:
        with open(prefix + ".json") as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read snapshot metadata {prefix}.json: {exc}") from exc
    for key in ("d", "n", "L"):
        if key not in meta:
            raise FileFormatError(f"snapshot metadata {prefix}.json lacks {key!r}")
    g = Grid(d=int(meta["d"]), n=int(meta["n"]), L=float(meta["L"]))
    try:
        raw = np.fromfile(prefix + ".f64", dtype="<f8")
    except OSError as exc:
        raise FileFormatError(f"cannot read snapshot data {prefix}.f64: {exc}") from exc
    if raw.size != g.size:
        raise FileFormatError(
            f"snapshot {prefix}.f64 holds {raw.size} values, grid needs {g.size}"
        )
    return Field(g, raw.reshape(g.shape)), meta
