"""FFT building blocks: power-law convolutions and the singular difference integral.

Two operators drive the collision model:

* ``power_convolve``: [g * |.|^mu](v) for mu in (-d, 0), as a *linear*
  (zero-padded, non-circular) convolution of the box-supported field with the
  kernel sampled on the padded offset lattice.  For fields supported in the
  box this is exactly the midpoint-rule quadrature of the convolution
  integral; the kernel's singular cell at the origin is replaced by its
  equal-volume-ball average, which is the exact radial cell integral up to a
  shape constant.

* ``frac_integral``: L_s g(v) = p.v. integral of (g(v+w) - g(v)) |w|^{-d-2s} dw,
  realized as the Fourier multiplier -|xi|^{2s} / frac_norm with the field
  treated as periodic on its own box (period 2L per axis, dual lattice
  xi_k = pi k / L), i.e. L_s = -(-Delta)^s / frac_norm in the periodic sense.
  Constants are annihilated exactly (m(0) = 0 and a periodic constant has no
  other modes), parity is preserved exactly, and the multiplier is
  self-adjoint on the box, which the collision module exploits for exact
  discrete mass conservation.  For a decaying field the difference from the
  free-space operator is the periodic-image tail, O((2L)^{-d-2s}) per image.

A SpectralPlan owns the padded-lattice kernel spectra and multipliers for one
(Grid, ModelParams) pair.  Plans hold scratch state and are not safe for
concurrent use; make one per worker.
"""

from __future__ import annotations

import math

import numpy as np

from .constants import ModelParams, ConstantSet, compute_constants
from .errors import CostError, DomainError
from .grid import Field, Grid


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def singular_cell_average(d: int, h: float, mu: float) -> float:
    """Average of |v|^mu over the ball with the same volume as one grid cell."""
    r0 = h * unit_ball_volume(d) ** (-1.0 / d)
    return d / (d + mu) * r0**mu


class SpectralPlan:
    """Cached kernels/multipliers for one (Grid, ModelParams) pair."""

    def __init__(self, grid: Grid, params: ModelParams, constants: ConstantSet | None = None):
        self.grid = grid
        self.params = params
        self.constants = constants if constants is not None else compute_constants(params)
        self._kernel_hat: dict[float, np.ndarray] = {}
        n, d, h = grid.n, grid.d, grid.h
        self.padded_shape = (2 * n,) * d

        # centered offsets of the padded lattice: index m -> (m if m <= n else m - 2n) * h
        m = np.arange(2 * n)
        off = np.where(m <= n, m, m - 2 * n) * h
        r2 = np.zeros(self.padded_shape)
        for axis in range(d):
            shape = [1] * d
            shape[axis] = 2 * n
            r2 = r2 + (off.reshape(shape)) ** 2
        self._offset_radius = np.sqrt(r2)

        # dual lattice of the box itself (period 2L, xi_k = pi k / L);
        # rfft layout on the last axis
        xi_full = 2.0 * math.pi * np.fft.fftfreq(n, d=h)
        xi_last = abs(xi_full[: n // 2 + 1])
        xi2 = np.zeros(grid.shape[:-1] + (n // 2 + 1,))
        for axis in range(d):
            shape = [1] * d
            shape[axis] = n if axis < d - 1 else n // 2 + 1
            xi = xi_full if axis < d - 1 else xi_last
            xi2 = xi2 + (xi.reshape(shape)) ** 2
        self._xi2 = xi2
        self._frac_mult = -(xi2 ** self.params.s) / self.constants.frac_norm
        self._lap_mult = -xi2

        # pre-build the kernels the Carleman form needs (when their exponents
        # are in convolution range; e.g. gamma+2s > 0 outside the very soft
        # regime, where only frac_integral is meaningful)
        for mu in (params.gamma + 2.0 * params.s, params.gamma):
            if -grid.d < mu < 0.0:
                self.kernel_hat(mu)

    def kernel_hat(self, mu: float) -> np.ndarray:
        """Real spectrum of the padded |.|^mu kernel (cached per mu)."""
        key = float(mu)
        if key not in self._kernel_hat:
            if not (-self.grid.d < mu < 0.0):
                raise DomainError(f"kernel exponent mu must lie in (-d, 0), got {mu!r}")
            kern = np.empty(self.padded_shape)
            nonzero = self._offset_radius > 0
            kern[nonzero] = self._offset_radius[nonzero] ** mu
            kern[~nonzero] = singular_cell_average(self.grid.d, self.grid.h, mu)
            # the kernel is even under negation mod 2n, so its spectrum is real
            self._kernel_hat[key] = np.fft.rfftn(kern).real
        return self._kernel_hat[key]

    def pad(self, values: np.ndarray) -> np.ndarray:
        buf = np.zeros(self.padded_shape)
        buf[(slice(0, self.grid.n),) * self.grid.d] = values
        return buf

    def _restrict(self, padded: np.ndarray) -> np.ndarray:
        return padded[(slice(0, self.grid.n),) * self.grid.d].copy()

    def apply_multiplier(self, values: np.ndarray, mult: np.ndarray) -> np.ndarray:
        """Apply a box-periodic Fourier multiplier (rfft layout) to box values."""
        ghat = np.fft.rfftn(values)
        return np.fft.irfftn(ghat * mult, s=self.grid.shape, axes=range(self.grid.d))


def power_convolve(plan: SpectralPlan, g: Field, mu: float) -> Field:
    """[g * |.|^mu] on the original box via zero-padded FFT convolution."""
    if g.grid != plan.grid:
        raise DomainError("field grid does not match plan grid")
    khat = plan.kernel_hat(mu)
    ghat = np.fft.rfftn(plan.pad(g.values))
    out = plan._restrict(np.fft.irfftn(ghat * khat, s=plan.padded_shape, axes=range(plan.grid.d)))
    out *= plan.grid.h**plan.grid.d
    return Field(plan.grid, out)


def frac_integral(plan: SpectralPlan, g: Field) -> Field:
    """L_s g = -(-Delta)^s g / frac_norm via the padded periodic multiplier."""
    if g.grid != plan.grid:
        raise DomainError("field grid does not match plan grid")
    return Field(plan.grid, plan.apply_multiplier(g.values, plan._frac_mult))


def laplacian(plan: SpectralPlan, g: Field) -> Field:
    """Periodic spectral Laplacian on the padded box (for the Landau limit)."""
    if g.grid != plan.grid:
        raise DomainError("field grid does not match plan grid")
    return Field(plan.grid, plan.apply_multiplier(g.values, plan._lap_mult))


def power_convolve_direct(grid: Grid, g: Field, mu: float, nodes) -> list:
    """Brute-force [g * |.|^mu] at selected nodes, identical kernel samples.

    ``nodes`` is a list of index tuples.  Cost guard: n^d summands per node,
    at most 1e7.
    """
    if not (-grid.d < mu < 0.0):
        raise DomainError(f"kernel exponent mu must lie in (-d, 0), got {mu!r}")
    if grid.size > 10**7:
        raise CostError(f"direct convolution over {grid.size} nodes exceeds the 1e7 guard")
    k0 = singular_cell_average(grid.d, grid.h, mu)
    hd = grid.h**grid.d
    axis = grid.axis()
    out = []
    for node in nodes:
        v = np.asarray([axis[i] for i in node])
        r2 = np.zeros(grid.shape)
        for a in range(grid.d):
            shape = [1] * grid.d
            shape[a] = grid.n
            r2 = r2 + ((axis - v[a]).reshape(shape)) ** 2
        r = np.sqrt(r2)
        kern = np.empty(grid.shape)
        nz = r > 0
        kern[nz] = r[nz] ** mu
        kern[~nz] = k0
        out.append(float((kern * g.values).sum() * hd))
    return out
