"""Time integration of the homogeneous relaxation dynamics with monitors.

The right-hand side is the Carleman-form collision operator applied to the
field itself; time stepping is classical explicit RK4 with a frozen-
coefficient stability bound (the diffusion coefficient is the field-dependent
weight [f * |.|^{gamma+2s}], so the bound is recomputed per step under the
CFL policy).

Monitors are evaluated post hoc on the diagnostics series and mirror the
model's proven properties: mass/momentum conservation, nonincreasing L^2
norm and entropy (asserted only inside the parameter range where the theory
guarantees them; report-only outside), an exponential-envelope bound on the
energy, boundedness of the sup norm with a fitted t^{-d/(2s)} + 1 envelope,
and fitted exponential-in-time envelopes for the polynomially weighted sup
norms.  The envelope constants are fitted, not derived -- the theory supplies
existence of constants, not values -- so those monitors check the functional
form and report the fitted constant as the margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .collision import q_carleman
from .constants import ModelParams
from .errors import BlowupError, ConfigError
from .grid import Field, Grid, build_field, diagnostics
from .spectral import SpectralPlan, power_convolve

BLOWUP_CEILING = 1e12


@dataclass
class SimConfig:
    """Run controls.

    The default box (L = 8 for a unit-variance Gaussian) keeps the initial
    condition's exterior mass below 1e-10 (it is ~4e-15); pick L per
    experiment with the same budget in mind.  Box-size sensitivity of the
    default run is measured in the test suite.
    """

    params: ModelParams
    n: int = 32
    L: float = 8.0
    ic: dict = field(default_factory=lambda: {"kind": "gaussian", "mass": 1.0, "center": 0.0, "variance": 1.0})
    t_end: float = 1.0
    dt_policy: dict = field(default_factory=lambda: {"policy": "cfl", "factor": 0.5})
    cadence: int = 1  # diagnostics every this many steps
    q_list: tuple = (2.0, 4.0)
    floor: str = "none"  # or "clamp"
    seed: int = 0
    snapshot_every: int = 0  # 0: initial and final only

    def __post_init__(self):
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end!r}")
        policy = self.dt_policy.get("policy")
        if policy == "cfl":
            fac = self.dt_policy.get("factor", 0.5)
            if not 0.0 < fac <= 1.0:
                raise ConfigError(f"cfl factor must be in (0, 1], got {fac!r}")
        elif policy == "fixed":
            if not self.dt_policy.get("dt", 0.0) > 0.0:
                raise ConfigError("fixed dt policy needs a positive 'dt'")
        else:
            raise ConfigError(f"unknown dt policy {policy!r}")
        if self.floor not in ("none", "clamp"):
            raise ConfigError(f"floor policy must be 'none' or 'clamp', got {self.floor!r}")
        if self.cadence < 1:
            raise ConfigError("cadence must be >= 1")


@dataclass
class MonitorVerdict:
    name: str
    passed: bool
    margin: float
    t_worst: float
    asserted: bool = True  # False: reported, not counted as failure
    info: dict = field(default_factory=dict)

    def as_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "margin": self.margin,
            "t_worst": self.t_worst,
        }


@dataclass
class RunResult:
    diagnostics: list
    snapshots: list  # (step, t, Field)
    verdicts: list
    steps: int
    final: Field


def stable_dt(plan: SpectralPlan, f: Field, factor: float) -> float:
    """Frozen-coefficient explicit step bound.

    dt = factor / (c_dgs max A |xi_max|^{2s} / frac_norm + c_dgs cR max B),
    A = [f*|.|^{gamma+2s}], B = [f*|.|^gamma], |xi_max| the largest dual-grid
    frequency magnitude.  Returns +inf for a zero field (no dynamics; the run
    loop caps dt at the remaining time, so a zero-field run steps straight to
    t_end).
    """
    cs = plan.constants
    p = plan.params
    A = power_convolve(plan, f, p.gamma + 2.0 * p.s)
    B = power_convolve(plan, f, p.gamma)
    xi_max = math.sqrt(p.d) * math.pi / plan.grid.h
    coeff = cs.c_dgs * (
        max(float(A.values.max()), 0.0) * xi_max ** (2.0 * p.s) / cs.frac_norm
        + cs.cR * max(float(B.values.max()), 0.0)
    )
    if coeff <= 0.0:
        return math.inf
    return factor / coeff


@dataclass
class StepResult:
    field: Field
    min_before_floor: float


def step_rk4(plan: SpectralPlan, f: Field, dt: float, floor: str = "none") -> StepResult:
    """One classical 4-stage explicit step of df/dt = Q(f, f)."""
    grid = plan.grid

    def rhs(values: np.ndarray) -> np.ndarray:
        return q_carleman(plan, Field(grid, values), Field(grid, values)).values

    y = f.values
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)) or np.abs(out).max() > BLOWUP_CEILING:
        raise BlowupError("time step produced non-finite or oversized values", last_good=f)
    min_before = float(out.min())
    if floor == "clamp":
        out = np.maximum(out, 0.0)
    return StepResult(field=Field(grid, out), min_before_floor=min_before)


def run(config: SimConfig) -> RunResult:
    """Integrate to t_end, stream diagnostics, and evaluate all monitors."""
    params = config.params
    grid = Grid(d=params.d, n=config.n, L=config.L)
    plan = SpectralPlan(grid, params)
    f = build_field(grid, config.ic)

    t = 0.0
    step = 0
    records = [diagnostics(f, t, config.q_list)]
    min_before = [float(f.values.min())]
    snapshots = [(0, 0.0, f.copy())]
    policy = config.dt_policy["policy"]

    while t < config.t_end - 1e-14 * config.t_end:
        if policy == "cfl":
            dt = stable_dt(plan, f, config.dt_policy.get("factor", 0.5))
        else:
            dt = config.dt_policy["dt"]
        dt = min(dt, config.t_end - t)
        try:
            result = step_rk4(plan, f, dt, config.floor)
        except BlowupError as exc:
            exc.last_good = f
            exc.t = t
            raise
        f = result.field
        t += dt
        step += 1
        if step % config.cadence == 0 or t >= config.t_end - 1e-14 * config.t_end:
            records.append(diagnostics(f, t, config.q_list))
            min_before.append(result.min_before_floor)
        if config.snapshot_every and step % config.snapshot_every == 0:
            snapshots.append((step, t, f.copy()))

    if snapshots[-1][0] != step:
        snapshots.append((step, t, f.copy()))

    verdicts = evaluate_monitors(params, records, config)
    return RunResult(
        diagnostics=records, snapshots=snapshots, verdicts=verdicts, steps=step, final=f
    )


def _series(records, attr):
    return np.array([getattr(r, attr) for r in records])


def evaluate_monitors(params: ModelParams, records, config: SimConfig) -> list:
    """Post-hoc monitor suite over a diagnostics series."""
    out = []
    ts = _series(records, "t")
    mass = _series(records, "mass")
    energy = _series(records, "energy")
    entropy = _series(records, "entropy")
    l2 = _series(records, "l2")
    linf = _series(records, "linf")
    momentum = np.stack([r.momentum for r in records])
    d, s = params.d, params.s
    L = config.L

    def worst(name, margins, asserted=True, info=None):
        k = int(np.argmin(margins))
        out.append(
            MonitorVerdict(
                name=name,
                passed=bool(margins[k] >= 0.0),
                margin=float(margins[k]),
                t_worst=float(ts[k]),
                asserted=asserted,
                info=info or {},
            )
        )

    # (i) L^2 nonincreasing per step (1e-6 relative tolerance); asserted only
    # where the theory guarantees it
    applicable = params.global_existence_range or params.gamma >= params.gamma_star
    rel_step = np.full(len(l2), np.inf)  # index 0 has no predecessor
    rel_step[1:] = (l2[:-1] - l2[1:]) / np.maximum(l2[:-1], 1e-300) + 1e-6
    worst("l2_nonincreasing", rel_step, asserted=applicable, info={"asserted": applicable})

    # (ii) conservation
    m0 = mass[0] if mass[0] != 0.0 else 1.0
    worst("mass_conservation", 1e-6 - np.abs(mass - mass[0]) / abs(m0))
    drift = np.abs(momentum - momentum[0]).max(axis=1)
    worst("momentum_conservation", 1e-6 * abs(m0) * L - drift)

    # (iii) entropy nonincreasing (same relative tolerance; scale |S|)
    ent_step = np.full(len(entropy), np.inf)
    ent_step[1:] = entropy[:-1] - entropy[1:] + 1e-6 * np.abs(entropy[:-1]) + 1e-12
    worst("entropy_nonincreasing", ent_step, asserted=applicable, info={"asserted": applicable})

    # (iv) energy under the fitted exponential envelope
    # E(t) <= E0 e^{Ct} + C'(e^{Ct} - 1), C = C' = lam * (||f||_L1 + ||f||_L2),
    # lam fitted at t = 0 from the observed initial slope (doubled for safety)
    S0 = mass[0] + l2[0]
    E0 = energy[0]
    slope0 = 0.0
    if len(ts) > 1 and ts[1] > ts[0]:
        slope0 = (energy[1] - energy[0]) / (ts[1] - ts[0])
    target = 2.0 * max(slope0, 0.0)
    lam = 1e-6
    if target > 0.0 and S0 > 0.0:
        # envelope'(0) = C E0 + C C' = lam S0 E0 + lam^2 S0^2 = target
        lam = (-E0 + math.sqrt(E0 * E0 + 4.0 * target)) / (2.0 * S0)
        lam = max(lam, 1e-6)
    C = lam * S0
    envelope = E0 * np.exp(C * ts) + C * (np.exp(C * ts) - 1.0)
    scale = max(abs(E0), 1e-300)
    worst(
        "energy_envelope",
        (envelope - energy) / scale + 1e-9,
        info={"fitted_C": C, "slope0": slope0},
    )

    # (v) sup norm finite; fitted N with linf <= N (t^{-d/2s} + 1) for t >= t_end/2
    half = ts >= 0.5 * config.t_end
    shape = ts[half] ** (-d / (2.0 * s)) + 1.0 if half.any() else np.array([1.0])
    N = float((linf[half] / shape).max()) if half.any() else float(linf.max())
    finite = np.isfinite(linf).all()
    out.append(
        MonitorVerdict(
            name="linf_bounded",
            passed=bool(finite),
            margin=N,
            t_worst=float(ts[-1]),
            info={"fitted_N": N},
        )
    )

    # (vi) weighted sup norms under fitted exponential envelopes
    for q in config.q_list:
        w = np.array([r.wsup.get(float(q), np.nan) for r in records])
        base = w[0] if w[0] > 0 else 1.0
        with np.errstate(divide="ignore"):
            rates = np.where(ts > 0, np.log(np.maximum(w, 1e-300) / base) / np.maximum(ts, 1e-300), 0.0)
        kappa = float(np.nanmax(rates))
        out.append(
            MonitorVerdict(
                name=f"wsup_envelope_q{q:g}",
                passed=bool(np.isfinite(w).all()),
                margin=kappa,
                t_worst=float(ts[int(np.nanargmax(rates))]),
                info={"fitted_kappa": kappa},
            )
        )

    return out
