import json
import math

import numpy as np
import pytest

from isoboltz.errors import DomainError, FileFormatError
from isoboltz.grid import (
    Field,
    Grid,
    build_field,
    diagnostics,
    gaussian,
    gaussian_profile,
    interpolate,
    load_snapshot,
    save_snapshot,
    zeros,
)


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid(d=4, n=16, L=8.0)
    with pytest.raises(DomainError):
        Grid(d=3, n=6, L=8.0)
    with pytest.raises(DomainError):
        Grid(d=3, n=15, L=8.0)  # odd: origin would fall between nodes
    g = Grid(d=3, n=12, L=6.0)
    assert g.h == 1.0
    assert 0.0 in g.axis()


def test_gaussian_mass_energy_momentum():
    g = Grid(d=3, n=32, L=8.0)
    f = gaussian(g, 1.0, 0.0, 1.0)
    rec = diagnostics(f, 0.0, [2.0])
    assert rec.mass == pytest.approx(1.0, abs=1e-8)
    assert rec.energy == pytest.approx(3.0, abs=1e-6)
    assert np.abs(rec.momentum).max() < 1e-12
    assert rec.l2**2 <= rec.linf * rec.mass * (1.0 + 1e-12)

    # second moment against a high-resolution quadrature oracle (1-D product)
    ax = np.linspace(-8 + 8 / 2048, 8 - 8 / 2048, 2048)
    w = 16 / 2048
    g1 = np.exp(-(ax**2) / 2.0) / math.sqrt(2 * math.pi)
    m1 = g1.sum() * w
    e1 = (ax**2 * g1).sum() * w
    assert rec.energy == pytest.approx(3.0 * e1 * m1**2, rel=1e-9)


def test_offcenter_gaussian_momentum():
    g = Grid(d=3, n=32, L=8.0)
    f = gaussian(g, 2.0, (1.0, 0.0, 0.0), 0.5)
    rec = diagnostics(f, 0.0)
    assert rec.momentum[0] == pytest.approx(2.0, abs=1e-6)
    assert abs(rec.momentum[1]) < 1e-10 and abs(rec.momentum[2]) < 1e-10


def test_zero_field_diagnostics():
    g = Grid(d=2, n=16, L=4.0)
    rec = diagnostics(zeros(g), 0.0, [2.0])
    assert rec.mass == 0.0 and rec.energy == 0.0 and rec.entropy == 0.0
    assert rec.l2 == 0.0 and rec.linf == 0.0 and rec.wsup[2.0] == 0.0


def test_constant_field_mass_exact():
    g = Grid(d=1, n=64, L=5.0)
    c = 0.37
    rec = diagnostics(Field(g, np.full(g.shape, c)), 0.0)
    assert rec.mass == pytest.approx(c * 2.0 * g.L, rel=1e-14)


def test_entropy_convention():
    g = Grid(d=1, n=16, L=4.0)
    vals = np.zeros(g.shape)
    vals[3] = 2.0
    vals[5] = -0.5  # negative values contribute nothing but show in min_f
    rec = diagnostics(Field(g, vals), 0.0)
    assert rec.entropy == pytest.approx(2.0 * math.log(2.0) * g.h)
    assert rec.min_f == -0.5


def test_even_field_has_zero_odd_moments():
    rng = np.random.default_rng(0)
    g = Grid(d=2, n=16, L=4.0)
    half = rng.standard_normal(g.shape)
    # symmetrize in the periodic-reflection sense i -> (n - i) mod n
    idx = (-np.arange(g.n)) % g.n
    even = half + half[np.ix_(idx, idx)]
    rec = diagnostics(Field(g, even), 0.0)
    scale = np.abs(even).max() * (2 * g.L) ** g.d
    assert np.abs(rec.momentum).max() < 1e-13 * scale


def test_diagnostics_refinement_order():
    # midpoint moments of the analytic Gaussian converge at >= 2nd order
    errs = []
    for n in (16, 32, 64):
        g = Grid(d=3, n=n, L=8.0)
        rec = diagnostics(gaussian(g, 1.0, 0.0, 1.0), 0.0)
        errs.append(abs(rec.energy - 3.0))
    assert errs[0] > 4.0 * errs[1] or errs[1] < 1e-12
    assert errs[1] > 4.0 * errs[2] or errs[2] < 1e-12


def test_build_field_kinds():
    g = Grid(d=2, n=16, L=4.0)
    f = build_field(g, {"kind": "gaussian", "mass": 2.0, "center": [1.0, 0.0], "variance": 0.3})
    assert diagnostics(f, 0.0).mass == pytest.approx(2.0, rel=1e-6)
    two = build_field(
        g,
        {
            "kind": "sum",
            "terms": [
                {"mass": 1.0, "center": [1.0, 0.0], "variance": 0.3},
                {"mass": 0.5, "center": [-1.0, 0.0], "variance": 0.3},
            ],
        },
    )
    assert diagnostics(two, 0.0).mass == pytest.approx(1.5, rel=1e-6)
    with pytest.raises(DomainError):
        build_field(g, {"kind": "gaussian", "variance": -1.0})
    with pytest.raises(DomainError):
        build_field(g, {"kind": "mystery"})


def test_gaussian_profile_matches_sampled_field():
    g = Grid(d=3, n=16, L=4.0)
    f = gaussian(g, 1.3, (0.5, 0.0, -0.5), 0.8)
    prof = gaussian_profile(1.3, (0.5, 0.0, -0.5), 0.8, 3)
    pts = np.stack([c.ravel() for c in np.meshgrid(*[g.axis()] * 3, indexing="ij")], axis=1)
    np.testing.assert_allclose(prof(pts).reshape(g.shape), f.values, rtol=1e-14)


def test_interpolation_nodes_and_outside():
    g = Grid(d=2, n=16, L=4.0)
    rng = np.random.default_rng(1)
    f = Field(g, rng.standard_normal(g.shape))
    pts = np.array([[g.axis()[3], g.axis()[10]], [g.axis()[0], g.axis()[0]]])
    vals = interpolate(f, pts)
    assert vals[0] == pytest.approx(f.values[3, 10], rel=1e-14)
    assert vals[1] == pytest.approx(f.values[0, 0], rel=1e-14)
    outside = interpolate(f, np.array([[5.0, 0.0], [0.0, -4.6], [100.0, 3.0]]))
    assert np.all(outside == 0.0)
    # midpoint of a cell is the corner average in 1-D slices
    mid = interpolate(f, np.array([[g.axis()[3] + g.h / 2, g.axis()[10]]]))
    assert mid[0] == pytest.approx(0.5 * (f.values[3, 10] + f.values[4, 10]), rel=1e-13)


def test_snapshot_roundtrip(tmp_path):
    from isoboltz.constants import ModelParams

    g = Grid(d=2, n=16, L=4.0)
    rng = np.random.default_rng(2)
    f = Field(g, rng.standard_normal(g.shape))
    prefix = str(tmp_path / "snap_000010")
    save_snapshot(f, prefix, 0.25, ModelParams(d=2, gamma=-1.3, s=0.6))
    back, meta = load_snapshot(prefix)
    assert back.grid == g
    np.testing.assert_array_equal(back.values, f.values)
    assert meta["t"] == 0.25
    assert meta["params"]["gamma"] == -1.3


def test_snapshot_format_errors(tmp_path):
    g = Grid(d=1, n=8, L=2.0)
    f = zeros(g)
    prefix = str(tmp_path / "bad")
    save_snapshot(f, prefix, 0.0)
    with open(prefix + ".f64", "wb") as fh:
        fh.write(b"\x00" * 8 * 5)  # wrong length
    with pytest.raises(FileFormatError):
        load_snapshot(prefix)
    with open(prefix + ".json", "w") as fh:
        fh.write("{not json")
    with pytest.raises(FileFormatError):
        load_snapshot(prefix)
    with pytest.raises(FileFormatError):
        load_snapshot(str(tmp_path / "absent"))
    # mismatched grid through the file ic
    save_snapshot(f, prefix, 0.0)
    with pytest.raises(FileFormatError):
        build_field(Grid(d=1, n=16, L=2.0), {"kind": "file", "path": prefix})
