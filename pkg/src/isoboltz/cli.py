"""Command-line front end: config parsing, subcommand dispatch, output writing.

Subcommands:

  constants       print the constant set for (d, gamma, s) as JSON
  scan-phi        write the sharpness scan (gamma, phi, ratio) as CSV
  check-operator  cross-validate the fast operator against the Monte-Carlo
                  oracle and the weak-form conservation functionals
  check-hardy     run the weighted fractional Hardy inequality suite
  landau-limit    sweep s -> 1 and record the operator gap to the isotropic
                  Landau form
  simulate        integrate the relaxation dynamics; write diagnostics CSV,
                  snapshots, and monitor verdicts

Exit codes: 0 all executed checks passed, 1 a check failed, 2 config error,
3 blow-up during time integration.

Every consumed config is echoed, fully resolved, to
<out>/resolved_config.json; re-running on the echo reproduces the outputs
bit for bit (all randomness flows from the single `seed` key).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .analysis import InequalityReport, WeakConfig, hardy_gap, weak_functional
from .collision import QuadratureConfig, q_carleman, q_direct_point, q_landau_iso
from .constants import ModelParams, compute_constants, threshold_scan
from .errors import BlowupError, IsoboltzError
from .grid import Field, Grid, build_field, gaussian, gaussian_profile, save_snapshot
from .sim import SimConfig, run
from .spectral import SpectralPlan

FLOAT_FMT = "%.17g"


def default_config() -> dict:
    return {
        "params": {"d": 3, "gamma": -2.1, "s": 0.85},
        "grid": {"n": 32, "L": 8.0},
        "ic": {"kind": "gaussian", "mass": 1.0, "center": [0.0, 0.0, 0.0], "variance": 1.0},
        "t_end": 1.0,
        "dt": {"policy": "cfl", "factor": 0.5},
        "cadence": 1,
        "q_list": [2.0, 4.0],
        "floor": "none",
        "seed": 0,
        "snapshot_every": 0,
        "check": {"nodes": 3, "mc_samples": 200000, "hardy_pairs": 5, "hardy_n": 12, "hardy_L": 6.0},
        "landau": {"gamma": -2.5, "s_values": [0.9, 0.99, 0.999], "n": 32, "L": 8.0},
    }


def _deep_update(base: dict, extra: dict) -> dict:
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], val)
        else:
            base[key] = val
    return base


def _parse_override(text: str):
    if "=" not in text:
        raise ValueError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _apply_override(cfg: dict, key: str, value) -> None:
    parts = key.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def resolve_config(args) -> dict:
    cfg = default_config()
    if args.config:
        with open(args.config) as fh:
            _deep_update(cfg, json.load(fh))
    if args.d is not None:
        cfg["params"]["d"] = args.d
    if getattr(args, "gamma", None) is not None:
        cfg["params"]["gamma"] = args.gamma
    if args.s is not None:
        cfg["params"]["s"] = args.s
    if args.seed is not None:
        cfg["seed"] = args.seed
    for item in args.set or []:
        key, value = _parse_override(item)
        _apply_override(cfg, key, value)
    return cfg


def _params(cfg: dict) -> ModelParams:
    p = cfg["params"]
    return ModelParams(d=int(p["d"]), gamma=float(p["gamma"]), s=float(p["s"]))


def _outdir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _echo_config(cfg: dict, out: str) -> None:
    with open(os.path.join(out, "resolved_config.json"), "w") as fh:
        json.dump(cfg, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ISOBOLTZ_THREADS", "1")))
    except ValueError:
        return 1


def cmd_constants(args) -> int:
    cfg = resolve_config(args)
    cs = compute_constants(_params(cfg))
    text = json.dumps(cs.as_dict(), indent=1, sort_keys=True)
    print(text)
    if args.out:
        out = _outdir(args)
        _echo_config(cfg, out)
        with open(os.path.join(out, "constants.json"), "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_scan_phi(args) -> int:
    cfg = resolve_config(args)
    p = cfg["params"]
    d, s = int(p["d"]), float(p["s"])
    gamma_star = -(d + 4.0 * s) / 3.0
    lo = args.scan_from if args.scan_from is not None else gamma_star - 0.2
    hi = args.scan_to if args.scan_to is not None else min(gamma_star + 0.2, -2.0 * s - 1e-3)
    result = threshold_scan(d, s, lo, hi, args.n_samples)
    out = _outdir(args)
    _echo_config(cfg, out)
    path = os.path.join(out, "scan_phi.csv")
    with open(path, "w") as fh:
        fh.write("gamma,phi,ratio\n")
        for g, phi_val, ratio in result.rows:
            fh.write(",".join(FLOAT_FMT % x for x in (g, phi_val, ratio)) + "\n")
    print(json.dumps({"root": result.root, "expected": gamma_star, "csv": path}))
    return 0


def _report_line(report: InequalityReport, name: str) -> str:
    payload = {"name": name, **report.as_dict()}
    return json.dumps(payload, default=float)


def cmd_check_operator(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    grid = Grid(d=params.d, n=int(cfg["grid"]["n"]), L=float(cfg["grid"]["L"]))
    plan = SpectralPlan(grid, params)
    ic = cfg["ic"]
    f = build_field(grid, ic)
    if ic.get("kind") == "gaussian":
        f_eval = gaussian_profile(ic.get("mass", 1.0), ic.get("center", 0.0), ic.get("variance", 1.0), params.d)
    else:
        f_eval = None
    Q = q_carleman(plan, f, f)
    n_nodes = int(cfg["check"]["nodes"])
    rng = np.random.default_rng(int(cfg["seed"]))
    # sample nodes near the bulk of the density, where both paths resolve
    # the operator well above their discretization floors
    half_width = max(1, grid.n // 8)
    idx = rng.integers(grid.n // 2 - half_width, grid.n // 2 + half_width + 1,
                       size=(n_nodes, params.d))
    axis = grid.axis()
    ok = True
    lines = []

    def one(i):
        node = idx[i]
        v = np.array([axis[j] for j in node])
        mc, err = q_direct_point(
            params, f, f, v,
            QuadratureConfig(n_samples=int(cfg["check"]["mc_samples"]), seed=int(cfg["seed"]) + i),
            f_eval=f_eval, g_eval=f_eval,
        )
        fast = float(Q.values[tuple(node)])
        gap = abs(fast - mc)
        return InequalityReport(
            lhs=gap, rhs=3.0 * err, slack=3.0 * err - gap, passed=bool(gap <= 3.0 * err),
            meta={"node": [float(x) for x in v], "mc": mc, "stderr": err, "fast": fast},
        )

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        reports = list(pool.map(one, range(n_nodes)))
    for rep in reports:
        ok &= rep.passed
        lines.append(_report_line(rep, "operator_vs_mc"))

    # weak-form conservation functionals
    hd = grid.h**params.d
    wcfg = WeakConfig(n_samples=int(cfg["check"]["mc_samples"]), seed=int(cfg["seed"]))
    for phi, grid_sum in (
        ("1", float(Q.values.sum() * hd)),
        *[
            (f"v{i+1}", float((_odd_axis_weighted(grid, Q.values, i)) * hd))
            for i in range(params.d)
        ],
    ):
        val, err = weak_functional(params, f, phi, wcfg, f_eval=f_eval)
        gap = abs(grid_sum - val)
        tol = 3.0 * err + 1e-10 * max(abs(Q.values).max(), 1.0)
        rep = InequalityReport(
            lhs=gap, rhs=tol, slack=tol - gap, passed=bool(gap <= tol),
            meta={"phi": phi, "weak": val, "stderr": err, "grid_sum": grid_sum},
        )
        ok &= rep.passed
        lines.append(_report_line(rep, "weak_form"))

    out = _outdir(args)
    _echo_config(cfg, out)
    with open(os.path.join(out, "operator_checks.jsonl"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if ok else 1


def _odd_axis_weighted(grid: Grid, values: np.ndarray, axis: int) -> float:
    from .grid import odd_moment_axis

    ax = odd_moment_axis(grid)
    shape = [1] * grid.d
    shape[axis] = grid.n
    return float((ax.reshape(shape) * values).sum())


def cmd_check_hardy(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    n = int(cfg["check"]["hardy_n"])
    grid = Grid(d=params.d, n=n, L=float(cfg["check"]["hardy_L"]))
    plan = SpectralPlan(grid, params)
    rng = np.random.default_rng(int(cfg["seed"]))
    ok = True
    lines = []
    for k in range(int(cfg["check"]["hardy_pairs"])):
        u = _random_bump(grid, rng)
        fgauss = gaussian(
            grid, rng.uniform(0.5, 2.0), rng.uniform(-grid.L / 4, grid.L / 4, size=params.d),
            rng.uniform(0.5, 2.0),
        )
        rep = hardy_gap(plan, u, fgauss)
        ok &= rep.passed
        lines.append(_report_line(rep, f"hardy_{k}"))
    out = _outdir(args)
    _echo_config(cfg, out)
    with open(os.path.join(out, "hardy_checks.jsonl"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if ok else 1


def _random_bump(grid: Grid, rng) -> Field:
    center = rng.uniform(-grid.L / 4.0, grid.L / 4.0, size=grid.d)
    width = rng.uniform(0.3, 1.0) * grid.L / 4.0
    r2 = np.zeros(grid.shape)
    for c, c0 in zip(grid.coords(), center):
        r2 = r2 + (c - c0) ** 2
    vals = np.exp(-r2 / (2.0 * width**2))
    mask = np.ones(grid.shape, dtype=bool)
    ax_ok = np.abs(grid.axis()) <= grid.L / 2.0
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.n
        mask &= ax_ok.reshape(shape)
    return Field(grid, np.where(mask, vals, 0.0))


def cmd_landau_limit(args) -> int:
    cfg = resolve_config(args)
    lcfg = cfg["landau"]
    d = int(cfg["params"]["d"])
    gamma = float(lcfg["gamma"])
    grid = Grid(d=d, n=int(lcfg["n"]), L=float(lcfg["L"]))
    f = build_field(grid, cfg["ic"])
    rows = []
    gaps = []
    for s in lcfg["s_values"]:
        params = ModelParams(d=d, gamma=gamma, s=float(s))
        plan = SpectralPlan(grid, params)
        q_frac = q_carleman(plan, f, f)
        q_landau = q_landau_iso(plan, f, f)
        hd = grid.h**d
        norm = math.sqrt(float((q_landau.values**2).sum() * hd))
        gap = math.sqrt(float(((q_frac.values - q_landau.values) ** 2).sum() * hd)) / norm
        cs = plan.constants
        c1_gap = abs(cs.c1 - cs.a_landau) / cs.a_landau
        rows.append((float(s), 1.0 - float(s), gap, c1_gap))
        gaps.append(gap)
    out = _outdir(args)
    _echo_config(cfg, out)
    path = os.path.join(out, "landau_limit.csv")
    with open(path, "w") as fh:
        fh.write("s,one_minus_s,op_gap,c1_gap\n")
        for row in rows:
            fh.write(",".join(FLOAT_FMT % x for x in row) + "\n")
    decreasing = all(a > b for a, b in zip(gaps, gaps[1:]))
    print(json.dumps({"gaps": gaps, "monotone_decreasing": decreasing, "csv": path}))
    return 0 if decreasing else 1


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    sim_cfg = SimConfig(
        params=params,
        n=int(cfg["grid"]["n"]),
        L=float(cfg["grid"]["L"]),
        ic=cfg["ic"],
        t_end=float(cfg["t_end"]),
        dt_policy=cfg["dt"],
        cadence=int(cfg["cadence"]),
        q_list=tuple(float(q) for q in cfg["q_list"]),
        floor=cfg["floor"],
        seed=int(cfg["seed"]),
        snapshot_every=int(cfg["snapshot_every"]),
    )
    out = _outdir(args)
    _echo_config(cfg, out)
    try:
        result = run(sim_cfg)
    except BlowupError as exc:
        if exc.last_good is not None:
            save_snapshot(exc.last_good, os.path.join(out, "last_good"), exc.t or 0.0, params)
        print(f"blow-up at t={exc.t}: {exc}", file=sys.stderr)
        return 3

    _write_diagnostics_csv(os.path.join(out, "diagnostics.csv"), result, sim_cfg)
    for step, t, snap in result.snapshots:
        save_snapshot(snap, os.path.join(out, f"snap_{step:06d}"), t, params)
    with open(os.path.join(out, "monitors.jsonl"), "w") as fh:
        for verdict in result.verdicts:
            fh.write(json.dumps(verdict.as_json_dict(), default=float) + "\n")
    failed = [v for v in result.verdicts if v.asserted and not v.passed]
    for v in result.verdicts:
        tag = "PASS" if v.passed else ("FAIL" if v.asserted else "report")
        print(f"{v.name}: {tag} (margin={v.margin:.6g} at t={v.t_worst:.6g})")
    return 0 if not failed else 1


def _write_diagnostics_csv(path: str, result, sim_cfg: SimConfig) -> None:
    d = sim_cfg.params.d
    header = (
        ["t", "mass"]
        + [f"p{i+1}" for i in range(d)]
        + ["energy", "entropy", "l2", "linf", "min_f"]
        + [f"wsup_{q:g}" for q in sim_cfg.q_list]
    )
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for rec in result.diagnostics:
            row = (
                [rec.t, rec.mass]
                + list(rec.momentum)
                + [rec.energy, rec.entropy, rec.l2, rec.linf, rec.min_f]
                + [rec.wsup[float(q)] for q in sim_cfg.q_list]
            )
            fh.write(",".join(FLOAT_FMT % x for x in row) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoboltz",
        description="Isotropic kinetic collision model: constants, operators, checks, simulation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--d", type=int, help="dimension override")
        p.add_argument("--gamma", type=float, help="kernel exponent override")
        p.add_argument("--s", type=float, help="fractional order override")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--set", action="append", metavar="KEY=VAL", help="dotted-path override")

    p = sub.add_parser("constants", help="print the constant set as JSON")
    common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("scan-phi", help="scan the sharpness function and locate its root")
    common(p)
    p.add_argument("--from", dest="scan_from", type=float)
    p.add_argument("--to", dest="scan_to", type=float)
    p.add_argument("--n", dest="n_samples", type=int, default=41)
    p.set_defaults(func=cmd_scan_phi)

    p = sub.add_parser("check-operator", help="Monte-Carlo and weak-form cross-validation")
    common(p)
    p.set_defaults(func=cmd_check_operator)

    p = sub.add_parser("check-hardy", help="weighted fractional Hardy inequality suite")
    common(p)
    p.set_defaults(func=cmd_check_hardy)

    p = sub.add_parser("landau-limit", help="s -> 1 comparison sweep")
    common(p)
    p.set_defaults(func=cmd_landau_limit)

    p = sub.add_parser("simulate", help="run the relaxation dynamics")
    common(p)
    p.set_defaults(func=cmd_simulate)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, matching the config-error convention
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BlowupError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 3
    except (IsoboltzError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
