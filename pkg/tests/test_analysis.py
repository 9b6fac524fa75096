import math
import warnings

import numpy as np
import pytest

from isoboltz.analysis import (
    WeakConfig,
    coercivity_form,
    hardy_gap,
    riesz_residual,
    weak_functional,
)
from isoboltz.collision import q_carleman
from isoboltz.constants import ModelParams, compute_constants
from isoboltz.errors import ConvergenceError, CostError, DomainError
from isoboltz.grid import Field, Grid, gaussian, zeros
from isoboltz.spectral import SpectralPlan, power_convolve

from conftest import random_positive_field

P12 = ModelParams(d=3, gamma=-2.1, s=0.85)


@pytest.fixture(scope="module")
def plan12():
    return SpectralPlan(Grid(d=3, n=12, L=6.0), P12)


def inner_bump(grid, rng):
    center = rng.uniform(-grid.L / 4.0, grid.L / 4.0, size=grid.d)
    width = rng.uniform(0.3, 1.0)
    r2 = np.zeros(grid.shape)
    for c, c0 in zip(grid.coords(), center):
        r2 = r2 + (c - c0) ** 2
    vals = np.exp(-r2 / (2.0 * width**2))
    mask = np.ones(grid.shape, dtype=bool)
    ax_ok = np.abs(grid.axis()) <= grid.L / 2.0
    for axis in range(grid.d):
        sh = [1] * grid.d
        sh[axis] = grid.n
        mask &= ax_ok.reshape(sh)
    return Field(grid, np.where(mask, vals, 0.0))


# ---------------------------------------------------------------- weak form


def test_weak_functional_mass_bracket_vanishes(default_params, default_field, default_profile):
    val, err = weak_functional(
        default_params, default_field, "1", WeakConfig(n_samples=20000, seed=1),
        f_eval=default_profile,
    )
    assert val == 0.0 and err == 0.0


def test_weak_functional_momentum_bracket_vanishes(default_params, default_field, default_profile):
    for phi in ("v1", "v2", "v3"):
        val, err = weak_functional(
            default_params, default_field, phi, WeakConfig(n_samples=20000, seed=2),
            f_eval=default_profile,
        )
        assert abs(val) <= 3.0 * err + 1e-10


def test_weak_conservation_across_random_fields(default_params, default_grid):
    rng = np.random.default_rng(30)
    for k in range(10):
        f = random_positive_field(default_grid, rng)
        for phi in ("1", "v1"):
            val, err = weak_functional(
                default_params, f, phi, WeakConfig(n_samples=5000, seed=100 + k)
            )
            assert abs(val) <= 3.0 * err + 1e-10


def test_entropy_production_sign(default_params, default_grid):
    rng = np.random.default_rng(31)
    for k in range(3):
        f = random_positive_field(default_grid, rng)
        val, err = weak_functional(
            default_params, f, "logf", WeakConfig(n_samples=60000, seed=200 + k)
        )
        assert val <= 3.0 * err


def test_energy_production_defined_only_below_minus_two(default_grid, default_field):
    val, err = weak_functional(
        ModelParams(d=3, gamma=-2.1, s=0.85), default_field, "|v|2",
        WeakConfig(n_samples=40000, seed=3),
    )
    assert math.isfinite(val) and err > 0.0
    with pytest.raises(DomainError):
        weak_functional(
            ModelParams(d=3, gamma=-1.9, s=0.85), default_field, "|v|2",
            WeakConfig(n_samples=40000, seed=3),
        )


def test_weak_functional_phi_validation(default_params, default_field):
    with pytest.raises(DomainError):
        weak_functional(default_params, default_field, "v4", WeakConfig(n_samples=2000))
    with pytest.raises(DomainError):
        weak_functional(default_params, default_field, "mystery", WeakConfig(n_samples=2000))
    neg = Field(default_field.grid, default_field.values - 0.01)
    with pytest.raises(DomainError):
        weak_functional(default_params, neg, "logf", WeakConfig(n_samples=2000))


def test_weak_matches_grid_functional_for_smooth_bump(
    default_params, default_plan, default_field, default_profile
):
    # ties the weak form to the grid operator: sum(phi Q) h^d vs the
    # Monte-Carlo functional, for a compactly supported smooth bump
    g = default_plan.grid
    center = np.array([0.5, -0.5, 0.0])

    def bump(pts):
        pts = np.atleast_2d(pts)
        return np.exp(-((pts - center) ** 2).sum(axis=1) / 2.0)

    Q = q_carleman(default_plan, default_field, default_field)
    pts = np.stack([c.ravel() for c in np.meshgrid(*[g.axis()] * 3, indexing="ij")], axis=1)
    grid_sum = float((bump(pts).reshape(g.shape) * Q.values).sum() * g.h**3)
    val, err = weak_functional(
        default_params, default_field, bump, WeakConfig(n_samples=400000, seed=4),
        f_eval=default_profile,
    )
    assert abs(grid_sum - val) <= 3.0 * err + 1e-4 * abs(grid_sum)


# ------------------------------------------------------------------- hardy


def test_hardy_gap_examples(plan12):
    g = plan12.grid
    rng = np.random.default_rng(40)
    u = inner_bump(g, rng)

    # point mass at the origin
    pm = np.zeros(g.shape)
    pm[g.n // 2, g.n // 2, g.n // 2] = 1.0 / g.h**3
    rep = hardy_gap(plan12, u, Field(g, pm))
    assert rep.passed and rep.slack >= 0.0

    # zero u degenerates to 0 <= 0
    rep0 = hardy_gap(plan12, zeros(g), gaussian(g, 1.0, 0.0, 1.0))
    assert rep0.lhs == 0.0 and rep0.rhs == 0.0 and rep0.passed

    rep2 = hardy_gap(plan12, u, gaussian(g, 1.0, 0.0, 1.0))
    assert rep2.passed
    assert rep2.slack >= -1e-3 * rep2.rhs


def test_hardy_requires_inner_support(plan12):
    g = plan12.grid
    u = np.ones(g.shape)  # reaches the faces
    with pytest.raises(DomainError):
        hardy_gap(plan12, Field(g, u), gaussian(g, 1.0, 0.0, 1.0))


def test_hardy_cost_guard():
    g = Grid(d=3, n=32, L=8.0)
    plan = SpectralPlan(g, P12)
    u = zeros(g)
    with pytest.raises(CostError):
        hardy_gap(plan, u, gaussian(g, 1.0, 0.0, 1.0))


# -------------------------------------------------------------- coercivity


def test_coercivity_constant_input_is_zero(plan12):
    g = plan12.grid
    f = gaussian(g, 1.0, 0.0, 1.0)
    assert coercivity_form(plan12, f, Field(g, np.full(g.shape, 2.5))) == 0.0


def test_coercivity_quadratic_scaling(plan12):
    rng = np.random.default_rng(41)
    g = plan12.grid
    f = gaussian(g, 1.0, 0.0, 1.0)
    h = inner_bump(g, rng)
    base = coercivity_form(plan12, f, h)
    assert base > 0.0
    scaled = coercivity_form(plan12, f, Field(g, 3.0 * h.values))
    assert scaled == pytest.approx(9.0 * base, rel=1e-12)


def test_coercivity_dominates_hardy_reaction_integral(plan12):
    # N(f, u)^2 >= c_dgs * CH * sum u^2 [f*|.|^gamma] h^d: the same double
    # sums, minus the exterior terms the in-box form drops (so it sits just
    # below c_dgs * rhs)
    rng = np.random.default_rng(42)
    g = plan12.grid
    f = gaussian(g, 1.0, 0.0, 1.0)
    u = inner_bump(g, rng)
    rep = hardy_gap(plan12, u, f)
    n2 = coercivity_form(plan12, f, u)
    cs = plan12.constants
    assert n2 <= cs.c_dgs * rep.rhs * (1.0 + 1e-12)
    assert n2 >= 0.9 * cs.c_dgs * rep.rhs
    assert n2 >= cs.c_dgs * rep.lhs * (1.0 - 1e-3)


@pytest.mark.parametrize(
    "params",
    [
        ModelParams(d=3, gamma=-2.1, s=0.85),
        ModelParams(d=3, gamma=-2.4, s=0.9),
        ModelParams(d=1, gamma=-0.5, s=0.2),
    ],
)
def test_hardy_constant_equals_critical_power_quotient(params):
    # Independent validation of the sharp constant: for the pure power
    # u = |v|^-sigma both sides of the one-function weighted inequality are
    # scale invariant, and the per-shell quotient at the critical exponent
    # sigma* = (d+gamma)/2 is exactly the sharp constant.  One adaptive 1-D
    # quadrature per parameter set, no grids involved.
    from scipy.integrate import quad

    d, gam, s = params.d, params.gamma, params.s
    cs = compute_constants(params)
    sigma = (d + gam) / 2.0

    if d == 3:
        e1, e2 = 2.0 - sigma, 2.0 - 2.0 * sigma

        def bracket(rho):
            a, b = abs(1.0 - rho), 1.0 + rho
            avg_u = (b**e1 - a**e1) / (e1 * 2.0 * rho)
            avg_u2 = (b**e2 - a**e2) / (e2 * 2.0 * rho)
            return avg_u2 - 2.0 * avg_u + 1.0

    else:  # d == 1: the sphere is two points

        def bracket(rho):
            a, b = abs(1.0 - rho), 1.0 + rho
            avg_u = 0.5 * (a**-sigma + b**-sigma)
            avg_u2 = 0.5 * (a ** (-2 * sigma) + b ** (-2 * sigma))
            return avg_u2 - 2.0 * avg_u + 1.0

    sphere = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)

    def igr(rho):
        if rho < 1e-4:
            return bracket(1e-4) / 1e-8 * rho ** (d - 1.0 - d - 2.0 * s + 2.0)
        return rho ** (-1.0 - 2.0 * s) * bracket(rho)

    total = 0.0
    with warnings.catch_warnings():
        # roundoff chatter near the |1 - rho| kink; accuracy is asserted below
        warnings.simplefilter("ignore")
        for a, b in ((0.0, 0.5), (0.5, 2.0), (2.0, 50.0), (50.0, np.inf)):
            total += quad(igr, a, b, limit=400, points=[1.0] if a < 1.0 < b else None)[0]
    quotient = sphere * total
    assert quotient == pytest.approx(cs.CH, rel=1e-4)


# ------------------------------------------------------------------- riesz


def test_riesz_residual_d1():
    res = riesz_residual(ModelParams(d=1, gamma=-0.5, s=0.2), [1.0])
    assert res[0] < 1e-4


def test_riesz_residual_homogeneity():
    res = riesz_residual(ModelParams(d=1, gamma=-0.5, s=0.2), [1.0, 2.0])
    assert abs(res[0] - res[1]) < 1e-6


def test_riesz_residual_d3():
    res = riesz_residual(ModelParams(d=3, gamma=-2.1, s=0.85), [1.0])
    assert res[0] < 1e-2


def test_riesz_residual_d2():
    res = riesz_residual(ModelParams(d=2, gamma=-1.2, s=0.45), [1.0])
    assert res[0] < 1e-2
    with pytest.raises(DomainError):
        riesz_residual(ModelParams(d=2, gamma=-1.8, s=0.3), [1.0])


def test_riesz_residual_bad_radius():
    with pytest.raises(DomainError):
        riesz_residual(ModelParams(d=1, gamma=-0.5, s=0.2), [0.0])
