"""Sobolev, Bessel-potential and mixed space-time norms; exponent arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ExponentOutOfRange, HalfExcluded, RangeViolation
from .transforms import GridFunction, SpaceTimeField, extend_initial, wavenumbers


def _exact(value) -> Fraction:
    """Exact rational for decimal-like inputs (``0.1`` -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class SobolevSpec:
    """Regularity ``s`` with an optional Strichartz pair ``(mu, r)``."""

    s: float
    mu: Fraction | float | None = None
    r: Fraction | float | None = None

    def __post_init__(self):
        if (self.mu is None) != (self.r is None):
            raise ExponentOutOfRange("mu and r must be given together")
        if self.mu is not None:
            mu, r = float(self.mu), float(self.r)
            if not (mu >= 2 and r >= 2):
                raise ExponentOutOfRange("admissible pairs need mu, r >= 2")
            if abs(3.0 / mu + 1.0 / r - 0.5) > 1e-12:
                raise ExponentOutOfRange("(mu, r) violates 3/mu + 1/r = 1/2")

    @property
    def time_exponent(self) -> float:
        """Temporal regularity (s + 1) / 3 of boundary traces."""
        return (self.s + 1.0) / 3.0

    def admissibility_defect(self) -> Fraction:
        """``3/mu + 1/r - 1/2`` in exact arithmetic (zero for admissible pairs)."""
        return 3 / _exact(self.mu) + 1 / _exact(self.r) - Fraction(1, 2)


def strichartz_exponents(s, p) -> SobolevSpec:
    """Admissible pair attached to ``(s, p)`` in the low-regularity range."""
    s_q, p_q = _exact(s), _exact(p)
    if not (0 <= s_q < Fraction(1, 2)):
        raise RangeViolation(f"s = {s} must satisfy 0 <= s < 1/2")
    if not (1 <= p_q <= 6 / (1 - 2 * s_q)):
        raise RangeViolation(f"p = {p} must satisfy 1 <= p <= 6/(1-2s)")
    mu = 6 * (p_q + 1) / (p_q * (1 - 2 * s_q))
    r = 2 * (p_q + 1) / (1 + 2 * s_q * p_q)
    return SobolevSpec(float(s), mu, r)


def critical_power(s) -> Fraction:
    return 6 / (1 - 2 * _exact(s))


def sigma_exponent(s: float) -> float:
    """Time exponent of the forced whole-line trace estimate."""
    if s == 0.5:
        raise HalfExcluded("s = 1/2 is excluded")
    if not (-1 <= s <= 2):
        raise ExponentOutOfRange("sigma is defined for -1 <= s <= 2")
    if s < 0.5:
        return (1 - 2 * s) / 6
    if s < 2:
        return (2 - s) / 3
    return 0.5


def high_reg_condition_check(s: float, p: float) -> bool:
    """Smoothness-versus-growth condition on the nonlinearity for 1/2 < s <= 2."""
    if not (0.5 < s <= 2):
        raise ExponentOutOfRange("the high-regularity condition concerns 1/2 < s <= 2")
    p_int = float(p).is_integer()
    if p_int and int(p) % 2 == 0:
        return True
    s_int = float(s).is_integer()
    p_odd = p_int and int(p) % 2 == 1
    if s_int:
        return p >= s if p_odd else math.floor(p) >= s - 1
    return p > s if p_odd else math.floor(p) >= math.floor(s)


def compatibility_check(u0: GridFunction, g: GridFunction, s: float, tol: float = 1e-8) -> bool:
    """``u0(0) = g(0)`` up to ``tol (1 + |u0(0)|)``; vacuous for s < 1/2."""
    if s < 0.5:
        return True
    a, b = u0.values[0], g.values[0]
    return bool(abs(a - b) <= tol * (1 + abs(a)))


# ---------------------------------------------------------------------------
# Fourier-side norms


def _line_spectrum(f: GridFunction):
    k = wavenumbers(f)
    return k, f.h * np.fft.fft(f.values[:-1])


def hs_norm_line(f: GridFunction, s: float) -> float:
    """``(int (1 + k^2)^s |f_hat|^2 dk / 2pi)^{1/2}`` on the periodic FFT grid."""
    k, fh = _line_spectrum(f)
    dk = 2 * np.pi / ((f.n - 1) * f.h)
    total = np.sum((1 + k**2) ** s * np.abs(fh) ** 2) * dk / (2 * np.pi)
    return float(math.sqrt(total))


def bessel_potential(f: GridFunction, s: float) -> GridFunction:
    """Inverse transform of ``(1 + k^2)^{s/2} f_hat``."""
    k = wavenumbers(f)
    vals = np.fft.ifft((1 + k**2) ** (s / 2) * np.fft.fft(f.values[:-1]))
    return f.with_values(np.append(vals, vals[0]))


def lebesgue_norm(values: np.ndarray, h: float, r: float) -> float:
    return float((h * np.sum(np.abs(values) ** r)) ** (1.0 / r))


def bessel_norm(f: GridFunction, s: float, r: float, restrict: tuple[float, float] | None = None) -> float:
    """``||J^s f||_{L^r}``, optionally restricted to a subinterval."""
    if r < 1:
        raise ExponentOutOfRange("r must be at least 1")
    g = bessel_potential(f, s)
    vals = g.values[:-1]
    if restrict is not None:
        x = g.grid[:-1]
        vals = vals[(x >= restrict[0] - 1e-12) & (x <= restrict[1] + 1e-12)]
    return lebesgue_norm(vals, f.h, r)


def halfline_hs_surrogate(f: GridFunction, s: float, policy: str = "reflect", cutoff: float | None = None) -> float:
    """H^s norm of the fixed extension of half-line data (an upper bound for the infimum norm)."""
    return hs_norm_line(extend_initial(f, policy, cutoff), s)


def mixed_norm(u: SpaceTimeField, spec: SobolevSpec, policy: str = "reflect", cutoff: float | None = None) -> float:
    """``L^mu_t H^{s,r}_x`` on the half-line via extension, Bessel potential and restriction."""
    if spec.mu is None:
        raise ExponentOutOfRange("mixed norms need a Strichartz pair")
    mu, r = float(spec.mu), float(spec.r)
    if not math.isfinite(mu):
        raise ExponentOutOfRange("mu = infinity is excluded")
    L = u.x[-1]
    slices = np.array(
        [bessel_norm(extend_initial(u.slice(n), policy, cutoff), spec.s, r, restrict=(0.0, L)) for n in range(u.t.size)]
    )
    if u.t.size == 1:
        return float(slices[0])
    w = np.full(u.t.size, u.dt)
    w[0] = w[-1] = 0.5 * u.dt
    return float(np.sum(w * slices**mu) ** (1.0 / mu))


# ---------------------------------------------------------------------------
# physical-side fractional seminorm


def fractional_time_seminorm(z: GridFunction, m: float, panels: int = 64, order: int = 8, inner_nodes: int = 2048) -> float:
    """``(2 int_0^T int_0^{T-t} |z(t+l) - z(t)|^2 / l^{1+2m} dl dt)^{1/2}``.

    The samples are interpolated by a cubic spline.  The outer integral runs over
    the lag ``l = T u^2`` (graded towards l = 0), Gauss-Legendre in u; the inner
    integral over t uses Gauss-Legendre panels on [0, T - l].
    """
    if not (0 < m < 1):
        raise ExponentOutOfRange("m must lie in (0, 1)")
    T = z.b - z.a
    spline = CubicSpline(z.grid - z.a, z.values)
    gx, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    u = (edges[:-1, None] + 0.5 * np.diff(edges)[:, None] * (gx[None, :] + 1)).ravel()
    wu = (0.5 * np.diff(edges)[:, None] * gw[None, :]).ravel()
    lag = T * u**2
    dlag = 2 * T * u
    n_inner = max(1, inner_nodes // order)
    ix, iw = np.polynomial.legendre.leggauss(order)
    unit = np.linspace(0.0, 1.0, n_inner + 1)
    tu = (unit[:-1, None] + 0.5 * np.diff(unit)[:, None] * (ix[None, :] + 1)).ravel()
    tw = (0.5 * np.diff(unit)[:, None] * iw[None, :]).ravel()
    total = 0.0
    for l, wl, dl in zip(lag, wu, dlag):
        span = T - l
        if span <= 0 or l <= 0:
            continue
        t = tu * span
        diff = spline(t + l) - spline(t)
        inner = span * np.sum(tw * np.abs(diff) ** 2)
        total += wl * dl * inner / l ** (1 + 2 * m)
    return float(math.sqrt(2 * total))
