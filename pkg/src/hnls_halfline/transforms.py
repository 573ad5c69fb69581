"""Grid containers, Fourier-type transforms and extension operators."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridMismatch, ParameterError, TailTooLarge, UpperHalfPlane
from .spectral import PdeParams, omega


class GridKind(enum.Enum):
    SPATIAL = "Spatial"
    TEMPORAL = "Temporal"


@dataclass(frozen=True)
class GridFunction:
    """Uniform samples on ``[a, b]``, both endpoints included."""

    a: float
    b: float
    values: np.ndarray
    kind: GridKind = GridKind.SPATIAL

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size < 2:
            raise ParameterError("a grid function needs at least two samples")
        if not self.b > self.a:
            raise ParameterError("grid interval must satisfy a < b")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.a, self.b, values, self.kind)

    @classmethod
    def sample(cls, func, a: float, b: float, n: int, kind: GridKind = GridKind.SPATIAL) -> GridFunction:
        return cls(a, b, func(np.linspace(a, b, n)), kind)


@dataclass(frozen=True)
class SpaceTimeField:
    """Samples ``values[n, i] = u(x_i, t_n)`` on uniform grids."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.t, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (t.size, x.size):
            raise GridMismatch(f"values shape {vals.shape} does not match (Nt, Nx) = ({t.size}, {x.size})")
        for name, g in (("x", x), ("t", t)):
            if g.size >= 3 and not np.allclose(np.diff(g), g[1] - g[0], rtol=1e-9, atol=0):
                raise GridMismatch(f"{name} grid is not uniform")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", vals)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def slice(self, n: int) -> GridFunction:
        return GridFunction(self.x[0], self.x[-1], self.values[n], GridKind.SPATIAL)

    def restrict_x(self, lo: float, hi: float) -> SpaceTimeField:
        mask = (self.x >= lo - 1e-12) & (self.x <= hi + 1e-12)
        return SpaceTimeField(self.x[mask], self.t, self.values[:, mask])

    def __add__(self, other: SpaceTimeField) -> SpaceTimeField:
        if self.values.shape != other.values.shape or not (
            np.allclose(self.x, other.x) and np.allclose(self.t, other.t)
        ):
            raise GridMismatch("fields live on different grids")
        return SpaceTimeField(self.x, self.t, self.values + other.values)


# ---------------------------------------------------------------------------
# spatial transforms


def half_line_ft(f: GridFunction, k, decay_tol: float = 1e-6):
    """Endpoint-corrected trapezoid for ``int_0^L exp(-i k x) f(x) dx``, Im k <= 0."""
    scalar = np.isscalar(k)
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(k.imag > 1e-14):
        raise UpperHalfPlane("the half-line transform is only defined for Im k <= 0")
    vals = f.values
    scale = np.max(np.abs(vals))
    if scale > 0 and abs(vals[-1]) > decay_tol * scale:
        raise TailTooLarge(f"|f(L)| = {abs(vals[-1]):.3g} exceeds {decay_tol:g} of max|f|; enlarge L")
    x = f.grid - f.a
    h = f.h
    w = np.full(f.n, h)
    w[0] = w[-1] = 0.5 * h
    total = np.empty(k.size, dtype=complex)
    for lo in range(0, k.size, 512):
        total[lo : lo + 512] = np.exp(-1j * np.outer(k[lo : lo + 512], x)) @ (w * vals)
    # Euler-Maclaurin h^2 correction with second-order one-sided slopes of f
    d_left = (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h)
    d_right = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * h)
    dF_left = d_left - 1j * k * vals[0]
    dF_right = np.exp(-1j * k * x[-1]) * (d_right - 1j * k * vals[-1])
    total = total - h**2 / 12.0 * (dF_right - dF_left)
    return complex(total[0]) if scalar else total


def wavenumbers(f: GridFunction) -> np.ndarray:
    """Angular wavenumbers of the periodic grid obtained by dropping the last sample."""
    return 2 * np.pi * np.fft.fftfreq(f.n - 1, d=f.h)


def whole_line_propagator_apply(f: GridFunction, t: float, params: PdeParams) -> GridFunction:
    """Free evolution ``exp(-omega(k) t)`` applied through the FFT on the periodic grid."""
    k = wavenumbers(f)
    spec = np.fft.fft(f.values[:-1])
    out = np.fft.ifft(spec * np.exp(-omega(k, params) * t))
    return f.with_values(np.append(out, out[0]))


# ---------------------------------------------------------------------------
# temporal transforms


def _psi(z: np.ndarray, order: int = 3) -> np.ndarray:
    """``psi_n(z) = int_0^1 exp(z u) u^n du`` for n = 0..order, shape (order+1, *z.shape)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((order + 1,) + z.shape, dtype=complex)
    small = np.abs(z) < 4.0
    if np.any(small):
        zs = z[small]
        term = np.ones_like(zs)
        acc = [np.zeros_like(zs) for _ in range(order + 1)]
        for m in range(40):
            for n in range(order + 1):
                acc[n] += term / (m + n + 1)
            term = term * zs / (m + 1)
        for n in range(order + 1):
            out[n][small] = acc[n]
    big = ~small
    if np.any(big):
        zb = z[big]
        ez = np.exp(zb)
        prev = np.expm1(zb) / zb
        out[0][big] = prev
        for n in range(1, order + 1):
            prev = (ez - n * prev) / zb
            out[n][big] = prev
    return out


def _spline_coefficients(values: np.ndarray, h: float) -> np.ndarray:
    """Per-interval monomial coefficients, shape (4, J, ...) ordered constant..cubic."""
    n = values.shape[0]
    t = np.arange(n) * h
    if n < 4:
        # linear interpolation: constant and slope only
        coef = np.zeros((4, n - 1) + values.shape[1:], dtype=complex)
        coef[0] = values[:-1]
        coef[1] = (values[1:] - values[:-1]) / h
        return coef
    spline = CubicSpline(t, values, bc_type="not-a-knot", axis=0)
    return spline.c[::-1]


def time_transform_many(h: GridFunction, kappa, t_end: float | None = None, chunk: int = 512) -> np.ndarray:
    """``int_0^{t_end} exp(kappa s) h(s) ds`` for many kappa at once.

    The samples are replaced by their not-a-knot cubic spline, which is then
    integrated against the exponential exactly (Filon-type), so large
    ``|kappa|`` costs no extra resolution.  Exact for cubic data.
    """
    kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
    step = h.h
    if t_end is None:
        t_end = h.b
    if t_end > h.b + 1e-12 * max(1.0, abs(h.b)) or t_end < h.a:
        raise ParameterError("t_end must lie inside the sample interval")
    rel = (t_end - h.a) / step
    n_full = int(math.floor(rel + 1e-9))
    n_full = min(n_full, h.n - 1)
    frac = rel - n_full
    coef = _spline_coefficients(h.values, step)
    starts = h.a + np.arange(h.n - 1) * step
    out = np.zeros(kappa.size, dtype=complex)
    for lo in range(0, kappa.size, chunk):
        kap = kappa[lo : lo + chunk]
        if n_full > 0:
            phase = np.exp(np.outer(kap, starts[:n_full]))
            psi = _psi(kap * step)
            for n in range(4):
                out[lo : lo + chunk] += step ** (n + 1) * psi[n] * (phase @ coef[n, :n_full])
        if frac > 1e-9 and n_full < h.n - 1:
            part = frac * step
            psi = _psi(kap * part)
            e0 = np.exp(kap * starts[n_full])
            for n in range(4):
                out[lo : lo + chunk] += part ** (n + 1) * psi[n] * e0 * coef[n, n_full]
    return out


def time_transform(h: GridFunction, kappa: complex, t_end: float | None = None) -> complex:
    """``int_0^{t_end} exp(kappa s) h(s) ds`` for a single kappa."""
    return complex(time_transform_many(h, np.array([kappa]), t_end)[0])


# ---------------------------------------------------------------------------
# extension operators

HESTENES_COEFFS = (6.0, -8.0, 3.0)


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def extension_cutoff(x, width: float):
    """Smooth cutoff equal to one on [0, width/2] and zero beyond ``width``."""
    return 1.0 - smooth_step((np.asarray(x) - 0.5 * width) / (0.5 * width))


def _negative_side(vals: np.ndarray, h: float, L: float, policy: str, cutoff: float | None) -> np.ndarray:
    """Values at x = -h, -2h, ... for rows of ``vals`` sampled on [0, L]."""
    n = vals.shape[-1]
    neg = np.zeros(vals.shape[:-1] + (n - 1,), dtype=complex)
    if policy == "zero":
        return neg
    if policy != "reflect":
        raise ParameterError(f"unknown extension policy {policy!r}")
    width = default_cutoff(L) if cutoff is None else cutoff
    idx = np.arange(1, n)
    for j, coeff in enumerate(HESTENES_COEFFS, start=1):
        src = j * idx
        ok = src < n
        neg[..., ok] += coeff * vals[..., src[ok]]
    return neg * extension_cutoff(idx * h, width)


def default_cutoff(L: float) -> float:
    """Default reflection width: narrow, so reflected copies stay close to the origin."""
    return min(1.5, L / 4)


def extend_field(values: np.ndarray, h: float, L: float, policy: str = "reflect", cutoff: float | None = None) -> np.ndarray:
    """Row-wise extension of (Nt, Nx) half-line samples to (Nt, 2 Nx - 1) on [-L, L]."""
    neg = _negative_side(values, h, L, policy, cutoff)
    return np.concatenate([neg[..., ::-1], values], axis=-1)


def extend_initial(u0: GridFunction, policy: str = "reflect", cutoff: float | None = None) -> GridFunction:
    """Extension from [0, L] to [-L, L].

    ``reflect``: Hestenes reflection ``u(-x) = chi(x) (6 u(x) - 8 u(2x) + 3 u(3x))``,
    which matches value, slope and curvature at the origin; ``chi`` is a smooth
    cutoff of width ``cutoff`` (default min(1.5, L/4)) keeping the extension local.
    ``zero``: extension by zero.
    """
    if abs(u0.a) > 1e-14:
        raise GridMismatch("initial data must start at x = 0")
    full = extend_field(u0.values, u0.h, u0.b, policy, cutoff)
    return GridFunction(-u0.b, u0.b, full, GridKind.SPATIAL)


def extend_boundary(g: GridFunction, T_prime: float, continuation: str = "constant") -> GridFunction:
    """Compactly supported extension of boundary data from [0, T] to [0, T'].

    The data is continued past T (constant value, or linear with the end slope)
    and multiplied by a smooth transition reaching zero at ``T' - eta`` with
    ``eta = (T' - T) / 4``; the output vanishes identically on ``[T' - eta, T']``.
    """
    T = g.b
    if abs(g.a) > 1e-14:
        raise GridMismatch("boundary data must start at t = 0")
    if not T_prime > T:
        raise ParameterError("T' must exceed T")
    dt = g.h
    extra = (T_prime - T) / dt
    n_extra = int(round(extra))
    if abs(extra - n_extra) > 1e-6:
        raise GridMismatch("T' - T must be an integer number of time steps")
    t_ext = T + dt * np.arange(1, n_extra + 1)
    eta = 0.25 * (T_prime - T)
    ramp = 1.0 - smooth_step((t_ext - T) / (T_prime - eta - T))
    vals = g.values
    if continuation == "constant":
        cont = np.full(n_extra, vals[-1])
    elif continuation == "linear":
        slope = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * dt)
        cont = vals[-1] + slope * (t_ext - T)
    else:
        raise ParameterError(f"unknown continuation {continuation!r}")
    out = np.concatenate([vals, cont * ramp])
    return GridFunction(0.0, T + n_extra * dt, out, GridKind.TEMPORAL)
