"""Closed-form constants of the isotropic collision model.

Everything here is an explicit product/quotient of Gamma values evaluated for
one parameter triple (d, gamma, s):

* ``c_dgs``      -- normalization of the double-integral collision kernel,
                    chosen so the operator has a finite limit as s -> 1.
* ``c1, c2``     -- coefficients of the Carleman (diffusion + reaction) form.
* ``cR``         -- reaction constant: the Riesz-potential image of |v|^{gamma+2s}
                    under the singular difference kernel is cR |v|^gamma.
* ``CH``         -- sharp constant of the weighted fractional Hardy inequality.
* ``a_landau, c_landau`` -- isotropic Landau coefficients (s -> 1 limit).
* ``frac_norm``  -- 4^s Gamma((d+2s)/2) / (pi^{d/2} |Gamma(-s)|), the constant
                    relating the singular difference integral to the standard
                    fractional Laplacian: L_s = -(-Delta)^s / frac_norm.
* ``phi``        -- the eight-Gamma sharpness function; cR/CH = 1/(2 phi - 1),
                    and phi = 1 exactly at gamma = -(d+4s)/3.

All formulas are evaluated in log-Gamma space with sign tracking, so they stay
robust arbitrarily close to (but not within 1e-9 of) Gamma poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NoRootError
from .specfun import POLE_MARGIN, check_pole, lgamma_sgn


@dataclass(frozen=True)
class ModelParams:
    """The (dimension, kernel exponent, fractional order) triple fixing the model."""

    d: int
    gamma: float
    s: float

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 1):
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        if not (-self.d < self.gamma < 0.0):
            raise DomainError(f"gamma must lie in (-d, 0) = (-{self.d}, 0), got {self.gamma!r}")
        if not (0.0 < self.s < 1.0):
            raise DomainError(f"s must lie in (0, 1), got {self.s!r}")

    @property
    def gamma_star(self) -> float:
        """Sharp threshold -(d+4s)/3 where cR/CH crosses 1."""
        return -(self.d + 4.0 * self.s) / 3.0

    @property
    def very_soft(self) -> bool:
        return self.gamma + 2.0 * self.s < 0.0

    @property
    def global_existence_range(self) -> bool:
        """d >= 3 and max{-(d+4s)/3, -2s-4s/d} <= gamma < -2."""
        if self.d < 3:
            return False
        lo = max(self.gamma_star, -2.0 * self.s - 4.0 * self.s / self.d)
        return lo <= self.gamma < -2.0


@dataclass(frozen=True)
class ConstantSet:
    c_dgs: float
    c1: float
    c2: float
    cR: float
    CH: float
    frac_norm: float
    ratio: float  # cR / CH
    a_landau: float | None
    c_landau: float | None

    def as_dict(self) -> dict:
        return {
            "c_dgs": self.c_dgs,
            "c1": self.c1,
            "c2": self.c2,
            "cR": self.cR,
            "CH": self.CH,
            "frac_norm": self.frac_norm,
            "ratio": self.ratio,
            "a_landau": self.a_landau,
            "c_landau": self.c_landau,
        }


def _gamma_quotient(numerator, denominator, names) -> float:
    """Signed product(Gamma(a) for a in numerator) / product(Gamma(b) ...).

    ``names`` maps each argument to a human-readable label used in PoleError
    messages.
    """
    log_acc = 0.0
    sign = 1.0
    for a in numerator:
        check_pole(a, names.get(a, f"{a}"))
        lg, sg = lgamma_sgn(a)
        log_acc += lg
        sign *= sg
    for b in denominator:
        check_pole(b, names.get(b, f"{b}"))
        lg, sg = lgamma_sgn(b)
        log_acc -= lg
        sign *= sg
    return sign * math.exp(log_acc)


def _named(params: ModelParams) -> dict:
    d, g, s = params.d, params.gamma, params.s
    return {
        (d + 2 * s) / 2: "(d+2s)/2",
        -(g + 2 * s) / 2: "-(gamma+2s)/2",
        (d + g + 2 * s) / 2: "(d+gamma+2s)/2",
        -s: "-s",
        -g / 2: "-gamma/2",
        (d + g) / 2: "(d+gamma)/2",
        (d - g) / 4: "(d-gamma)/4",
        (d + g + 4 * s) / 4: "(d+gamma+4s)/4",
        (d + g) / 4: "(d+gamma)/4",
        (d - g - 4 * s) / 4: "(d-gamma-4s)/4",
        (d + g + 2) / 2: "(d+gamma+2)/2",
    }


def frac_laplacian_norm(params: ModelParams) -> float:
    """4^s Gamma((d+2s)/2) / (pi^{d/2} |Gamma(-s)|)."""
    d, s = params.d, params.s
    names = _named(params)
    q = _gamma_quotient([(d + 2 * s) / 2], [-s], names)
    return 4.0**s / math.pi ** (d / 2.0) * abs(q)


def phi(params: ModelParams) -> float:
    """Eight-Gamma sharpness function; > 1 iff gamma > -(d+4s)/3 (in range)."""
    d, g, s = params.d, params.gamma, params.s
    names = _named(params)
    num = [(d - g) / 4, (d + g + 4 * s) / 4, (d + g) / 2, (-g - 2 * s) / 2]
    den = [(d + g) / 4, (d - g - 4 * s) / 4, -g / 2, (d + g + 2 * s) / 2]
    names[(-g - 2 * s) / 2] = "(-gamma-2s)/2"
    return _gamma_quotient(num, den, names)


def compute_constants(params: ModelParams) -> ConstantSet:
    """Evaluate every closed-form constant for one parameter triple.

    a_landau/c_landau are None when gamma is within 1e-9 of -2 (simple pole of
    the Landau normalization).
    """
    d, g, s = params.d, params.gamma, params.s
    names = _named(params)

    c_dgs = (
        (1.0 - s)
        / (math.pi**d * 2.0 ** (d + g))
        * _gamma_quotient([(d + 2 * s) / 2, -(g + 2 * s) / 2], [(d + g + 2 * s) / 2], names)
    )

    abs_gamma_ms = abs(_gamma_quotient([-s], [], names))
    c1 = (
        (1.0 - s)
        * abs_gamma_ms
        / (math.pi ** (d / 2.0) * 2.0 ** (d + g + 2 * s))
        * _gamma_quotient([-(g + 2 * s) / 2], [(d + g + 2 * s) / 2], names)
    )
    c2 = (
        (1.0 - s)
        * abs_gamma_ms
        / (math.pi ** (d / 2.0) * 2.0 ** (d + g))
        * _gamma_quotient([-g / 2], [(d + g) / 2], names)
    )
    cR = (
        math.pi ** (d / 2.0)
        * abs_gamma_ms
        * _gamma_quotient(
            [(g + 2 * s + d) / 2, -g / 2],
            [(d + 2 * s) / 2, (g + d) / 2, -(g + 2 * s) / 2],
            names,
        )
    )

    # CH = pref * (2*T1 - T2); pref > 0, T1/T2 signed.
    pref = math.pi ** (d / 2.0) * abs_gamma_ms / _gamma_quotient([(d + 2 * s) / 2], [], names)
    t1 = _gamma_quotient([(d - g) / 4, (d + g + 4 * s) / 4], [(d + g) / 4, (d - g - 4 * s) / 4], names)
    names[(-g - 2 * s) / 2] = "(-gamma-2s)/2"
    t2 = _gamma_quotient([-g / 2, (d + g + 2 * s) / 2], [(d + g) / 2, (-g - 2 * s) / 2], names)
    CH = pref * (2.0 * t1 - t2)

    frac_norm = frac_laplacian_norm(params)

    if abs(g + 2.0) < POLE_MARGIN:
        a_landau = None
        c_landau = None
    else:
        a_landau = (
            math.pi ** (-d / 2.0)
            / ((-g - 2.0) * 2.0 ** (d + g + 1))
            * _gamma_quotient([-g / 2], [(d + g + 2) / 2], names)
        )
        c_landau = (-g - 2.0) * (d + g) * a_landau

    ratio = cR / CH
    return ConstantSet(
        c_dgs=c_dgs,
        c1=c1,
        c2=c2,
        cR=cR,
        CH=CH,
        frac_norm=frac_norm,
        ratio=ratio,
        a_landau=a_landau,
        c_landau=c_landau,
    )


@dataclass(frozen=True)
class ScanResult:
    rows: list  # (gamma, phi, ratio) triples
    root: float  # bisection root of phi = 1

    def __iter__(self):
        return iter(self.rows)


def threshold_scan(d: int, s: float, gamma_lo: float, gamma_hi: float, n: int) -> ScanResult:
    """Sample (gamma, phi, cR/CH) on [gamma_lo, gamma_hi] and locate phi = 1.

    The bracket must lie inside (-d, -2s); the bisection root of phi - 1 is
    the sharpness threshold -(d+4s)/3.
    """
    if n < 2:
        raise DomainError(f"need n >= 2 samples, got {n}")
    if not (-d < gamma_lo < gamma_hi < -2.0 * s):
        raise DomainError(
            f"[{gamma_lo}, {gamma_hi}] must be inside (-d, -2s) = ({-d}, {-2.0 * s})"
        )

    def phi_at(g: float) -> float:
        return phi(ModelParams(d=d, gamma=g, s=s))

    rows = []
    gs = [gamma_lo + (gamma_hi - gamma_lo) * i / (n - 1) for i in range(n)]
    for g in gs:
        p = ModelParams(d=d, gamma=g, s=s)
        rows.append((g, phi_at(g), compute_constants(p).ratio))

    lo = hi = None
    for (ga, pa, _), (gb, pb, _) in zip(rows, rows[1:]):
        if (pa - 1.0) == 0.0:
            lo = hi = ga
            break
        if (pa - 1.0) * (pb - 1.0) < 0.0:
            lo, hi = ga, gb
            break
    if lo is None:
        raise NoRootError(
            f"phi - 1 does not change sign on [{gamma_lo}, {gamma_hi}] (d={d}, s={s})"
        )
    if lo != hi:
        fa = phi_at(lo) - 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = phi_at(mid) - 1.0
            if fm == 0.0:
                lo = hi = mid
                break
            if fa * fm < 0.0:
                hi = mid
            else:
                lo, fa = mid, fm
            if hi - lo < 1e-13 * max(1.0, abs(lo)):
                break
    return ScanResult(rows=rows, root=0.5 * (lo + hi))
