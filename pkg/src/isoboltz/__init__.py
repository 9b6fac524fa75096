"""Numerical library for an isotropic kinetic collision model.

Modules:
  specfun    Gamma / log-Gamma / digamma (self-contained)
  constants  closed-form model constants, the sharpness function, threshold scan
  grid       velocity grids, fields, diagnostics, snapshot I/O
  spectral   FFT power-law convolutions and the singular difference integral
  collision  the bilinear collision operator (fast, oracle, Landau limit)
  analysis   weak-form functionals, Hardy / coercivity checks, Riesz residual
  sim        RK4 time integration with conservation / monotonicity monitors
  cli        command-line front end
"""

__version__ = "0.1.0"

from .constants import ConstantSet, ModelParams, compute_constants, phi, threshold_scan
from .grid import Field, Grid, build_field, diagnostics, gaussian, load_snapshot, save_snapshot
from .spectral import SpectralPlan, frac_integral, power_convolve, power_convolve_direct
from .collision import KernelView, QuadratureConfig, q_carleman, q_direct_point, q_landau_iso
from .sim import SimConfig, run, stable_dt, step_rk4

__all__ = [
    "ConstantSet",
    "Field",
    "Grid",
    "KernelView",
    "ModelParams",
    "QuadratureConfig",
    "SimConfig",
    "SpectralPlan",
    "build_field",
    "compute_constants",
    "diagnostics",
    "frac_integral",
    "gaussian",
    "load_snapshot",
    "phi",
    "power_convolve",
    "power_convolve_direct",
    "q_carleman",
    "q_direct_point",
    "q_landau_iso",
    "run",
    "save_snapshot",
    "stable_dt",
    "step_rk4",
    "threshold_scan",
]
