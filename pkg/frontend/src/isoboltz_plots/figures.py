"""Figure rendering.

Each kind extracts plain arrays from input files first (``extract``), then
draws; extraction is pure, so identical inputs give identical extracted data
regardless of any image-level metadata.  Kinds:

* ``timeseries``     -- L2, mass, energy, entropy vs t on shared axes
* ``phi-scan``       -- the sharpness function and the constant ratio vs
                        gamma, with a vertical marker at the interpolated
                        phi = 1 crossing
* ``radial-profile`` -- angle-averaged f(|v|), one curve per snapshot
* ``landau-limit``   -- operator gap vs (1 - s) on log-log axes
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .readers import FormatError, phi_crossing, radial_profile, read_csv, read_snapshot

KINDS = ("timeseries", "phi-scan", "radial-profile", "landau-limit")


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FormatError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise FormatError("at least one input file is required")


def extract(spec: FigureSpec) -> dict:
    """Pure data extraction for a figure; raises FormatError on bad inputs."""
    if spec.kind == "timeseries":
        cols = read_csv(spec.inputs[0], required=("t", "mass", "energy", "entropy", "l2"))
        return {k: cols[k] for k in ("t", "mass", "energy", "entropy", "l2")}
    if spec.kind == "phi-scan":
        cols = read_csv(spec.inputs[0], required=("gamma", "phi", "ratio"))
        return {
            "gamma": cols["gamma"],
            "phi": cols["phi"],
            "ratio": cols["ratio"],
            "crossing": phi_crossing(cols["gamma"], cols["phi"]),
        }
    if spec.kind == "radial-profile":
        curves = []
        for prefix in spec.inputs:
            meta, values = read_snapshot(prefix)
            r, prof = radial_profile(meta, values)
            curves.append({"t": float(meta.get("t", 0.0)), "r": r, "profile": prof})
        return {"curves": curves}
    cols = read_csv(spec.inputs[0], required=("one_minus_s", "op_gap"))
    return {"one_minus_s": cols["one_minus_s"], "op_gap": cols["op_gap"]}


def render(spec: FigureSpec) -> dict:
    """Extract, draw, and write the image; returns the extracted data."""
    data = extract(spec)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)

    if spec.kind == "timeseries":
        t = data["t"]
        for name in ("l2", "mass", "energy", "entropy"):
            ax.plot(t, data[name], label=name)
        ax.set_xlabel("t")
        ax.legend(frameon=False)
        ax.set_title("diagnostics")

    elif spec.kind == "phi-scan":
        ax.plot(data["gamma"], data["phi"], label="phi")
        ax.plot(data["gamma"], data["ratio"], label="cR/CH")
        ax.axhline(1.0, color="0.7", lw=0.8)
        ax.axvline(data["crossing"], color="k", ls="--", lw=0.9,
                   label=f"crossing {data['crossing']:.4f}")
        ax.set_xlabel("gamma")
        ax.legend(frameon=False)
        ax.set_title("sharpness scan")

    elif spec.kind == "radial-profile":
        for curve in data["curves"]:
            ax.plot(curve["r"], curve["profile"], label=f"t = {curve['t']:g}")
        ax.set_xlabel("|v|")
        ax.set_ylabel("angle-averaged f")
        ax.set_yscale("log")
        ax.legend(frameon=False)
        ax.set_title("radial profiles")

    else:  # landau-limit
        ax.loglog(data["one_minus_s"], data["op_gap"], "o-")
        ax.set_xlabel("1 - s")
        ax.set_ylabel("relative operator gap")
        ax.set_title("Landau limit")

    fig.savefig(spec.output, dpi=130)
    plt.close(fig)
    return data
