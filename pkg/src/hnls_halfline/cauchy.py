"""Whole-line linear solvers: free propagation, Duhamel forcing, traces and the dispersive kernel."""

from __future__ import annotations

import csv
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import airy

from .errors import GridMismatch, ParameterError, TimeZero
from .spectral import PdeParams, omega
from .transforms import GridFunction, GridKind, SpaceTimeField, _psi


@dataclass(frozen=True)
class SolverConfig:
    """Horizon, grids and numerical tolerances shared by all solvers."""

    T: float = 1.0
    Tprime: float | None = None
    L: float = 30.0
    Nx: int = 1024
    Nt: int = 1024
    contour_density: float = 1.0
    truncation_M: float | None = None
    fixed_point_tol: float = 1e-10
    max_picard: int = 30
    quad_tol: float = 1e-6
    extension_cutoff: float | None = None
    fft_padding: int = 4
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.Tprime is None:
            object.__setattr__(self, "Tprime", 2.0 * self.T)
        if not (self.T > 0 and self.Tprime > self.T):
            raise ParameterError("need T' > T > 0")
        if not self.L > 0:
            raise ParameterError("L must be positive")
        if self.Nx < 16 or self.Nt < 16:
            raise ParameterError("Nx and Nt must be at least 16")
        if self.contour_density <= 0 or self.fixed_point_tol <= 0 or self.quad_tol <= 0:
            raise ParameterError("densities and tolerances must be positive")
        if self.max_picard < 1:
            raise ParameterError("max_picard must be at least 1")
        if self.fft_padding < 0:
            raise ParameterError("fft_padding must be non-negative")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.Nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.Nt)

    @property
    def dx(self) -> float:
        return self.L / (self.Nx - 1)

    @property
    def dt(self) -> float:
        return self.T / (self.Nt - 1)

    @property
    def x_line(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, 2 * self.Nx - 1)

    @property
    def t_extended(self) -> np.ndarray:
        """Time grid on [0, T'] with the same step, requiring T' to be a whole number of steps."""
        steps = (self.Tprime - 0.0) / self.dt
        n = int(round(steps))
        if abs(steps - n) > 1e-6:
            raise GridMismatch("T' must be a whole number of time steps")
        return np.arange(n + 1) * self.dt

    def replace(self, **changes) -> SolverConfig:
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if "T" in changes and "Tprime" not in changes:
            values["Tprime"] = None
        values.update(changes)
        return SolverConfig(**values)


def _wrap_guard(values: np.ndarray, tol: float = 1e-6) -> None:
    scale = np.max(np.abs(values))
    edge = max(np.max(np.abs(values[..., 0])), np.max(np.abs(values[..., -1])))
    if scale > 0 and edge > tol * scale:
        warnings.warn(
            f"solution reaches the edge of the window [-L, L] (edge/max = {edge / scale:.2e}); enlarge L",
            RuntimeWarning,
            stacklevel=3,
        )


def _padded_box(n_periodic: int, h: float, pad: int):
    """Wavenumbers of the box enlarged by ``pad`` copies of itself on each side.

    Also returns the padded length and the indices of the original n + 1 nodes
    (the last one wraps to the first when ``pad`` is zero).
    """
    m = n_periodic * (1 + 2 * pad)
    k = 2 * np.pi * np.fft.fftfreq(m, d=h)
    idx = np.arange(pad * n_periodic, (pad + 1) * n_periodic + 1) % m
    return k, m, idx


def _embed(values: np.ndarray, m: int, idx: np.ndarray) -> np.ndarray:
    out = np.zeros(m, dtype=complex)
    out[idx[:-1]] = values[:-1]
    return out


def solve_homogeneous(y0ext: GridFunction, config: SolverConfig, params: PdeParams, t=None) -> SpaceTimeField:
    """Free evolution of whole-line data on the FFT grid, one slice per time in ``t``.

    The box is zero-padded by ``config.fft_padding`` box lengths on each side so
    that fast dispersive tails leaving [-L, L] do not re-enter from the far side.
    """
    t = config.t if t is None else np.asarray(t, dtype=float)
    k, m, idx = _padded_box(y0ext.n - 1, y0ext.h, config.fft_padding)
    spec = np.fft.fft(_embed(y0ext.values, m, idx))
    w = omega(k, params)
    out = np.empty((t.size, y0ext.n), dtype=complex)
    for i, tn in enumerate(t):
        out[i] = np.fft.ifft(spec * np.exp(-w * tn))[idx]
    _wrap_guard(out)
    return SpaceTimeField(y0ext.grid, t, out)


def duhamel_weights(w: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Propagator and exponential-integrator weights for piecewise-linear forcing.

    Over one step, ``int_0^dt exp(-w (dt - s)) F(s) ds = a_old F_old + a_new F_new``
    exactly when F is linear in s.
    """
    z = w * dt
    psi = _psi(-z, order=1)
    a_old = dt * psi[1]
    a_new = dt * (psi[0] - psi[1])
    return np.exp(-z), a_old, a_new


def solve_duhamel(F: SpaceTimeField, config: SolverConfig, params: PdeParams) -> SpaceTimeField:
    """Zero-data solution driven by F: ``z_hat' = -omega z_hat - i F_hat`` (same padding as above)."""
    out = np.zeros_like(F.values)
    if F.t.size < 2:
        return SpaceTimeField(F.x, F.t, out)
    k, m, idx = _padded_box(F.x.size - 1, F.dx, config.fft_padding)
    w = omega(k, params)
    prop, a_old, a_new = duhamel_weights(w, F.dt)
    z_hat = np.zeros(m, dtype=complex)
    f_old = np.fft.fft(_embed(F.values[0], m, idx))
    for n in range(1, F.t.size):
        f_new = np.fft.fft(_embed(F.values[n], m, idx))
        z_hat = prop * z_hat - 1j * (a_old * f_old + a_new * f_new)
        out[n] = np.fft.ifft(z_hat)[idx]
        f_old = f_new
    _wrap_guard(out)
    return SpaceTimeField(F.x, F.t, out)


def trace_at_zero(u: SpaceTimeField) -> GridFunction:
    """Time series ``u(0, .)``; linear interpolation when 0 is not a grid node."""
    x = u.x
    if not (x[0] - 1e-12 <= 0.0 <= x[-1] + 1e-12):
        raise GridMismatch("x = 0 is not inside the spatial grid")
    idx = int(np.argmin(np.abs(x)))
    if abs(x[idx]) <= 1e-12 * max(1.0, abs(x[-1] - x[0])):
        vals = u.values[:, idx]
    else:
        j = int(np.searchsorted(x, 0.0)) - 1
        theta = (0.0 - x[j]) / (x[j + 1] - x[j])
        vals = (1 - theta) * u.values[:, j] + theta * u.values[:, j + 1]
    return GridFunction(u.t[0], u.t[-1], vals, GridKind.TEMPORAL)


# ---------------------------------------------------------------------------
# dispersive kernel


def _gauss_panels(breaks: np.ndarray, order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    left, width = breaks[:-1], np.diff(breaks)
    x = (left[:, None] + 0.5 * width[:, None] * (nodes[None, :] + 1.0)).ravel()
    w = (0.5 * width[:, None] * weights[None, :]).ravel()
    return x, w


def airy_integral(z: float, order: int = 16) -> complex:
    """``int exp(i (s^3/3 + z s)) ds`` along the line ``Im s = eta`` (equals 2 pi Ai(z)).

    Shifting the real line upwards turns the unit-modulus integrand into a
    Gaussian envelope ``exp(-eta u^2 + eta^3/3 - z eta)``; eta = sqrt(z) passes
    through the saddle for z > 0, and for z <= 0 a small eta keeps the growth factor
    ``exp(|z| eta)`` of order one.
    """
    if z > 0:
        eta = math.sqrt(z) if z > 1 else 1.0
    else:
        eta = min(1.0, 1.0 / math.sqrt(-z)) if z < -1 else 1.0
    log_peak = eta**3 / 3 - z * eta
    half = math.sqrt((40.0 + max(log_peak, 0.0)) / eta)
    # local frequency of the phase is |u^2 + z - eta^2|; keep <= pi per panel
    fine = np.linspace(-half, half, 8001)
    rate = np.abs(fine**2 + z - eta**2) + 1.0
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(fine))])
    n_pan = max(4, int(math.ceil(cum[-1] / math.pi)))
    breaks = np.interp(np.linspace(0, cum[-1], n_pan + 1), cum, fine)
    u, w = _gauss_panels(breaks, order)
    s = u + 1j * eta
    return complex(np.sum(w * np.exp(1j * (s**3 / 3 + z * s))))


def dispersive_kernel(x: float, y: float, t: float, params: PdeParams) -> complex:
    """``int exp(i k (x - y - t delta) + i t (beta k^3 - alpha k^2)) dk`` for t != 0.

    Shifting k by alpha/(3 beta) removes the quadratic term; rescaling leaves the
    canonical cubic integral, evaluated by :func:`airy_integral`.
    """
    if t == 0:
        raise TimeZero("the dispersive kernel is singular at t = 0")
    alpha, beta, delta = params.alpha, params.beta, params.delta
    if t < 0:
        return dispersive_kernel(-x, -y, -t, params).conjugate()
    a = alpha / (3 * beta)
    X = x - y - t * delta
    Y = X - t * alpha**2 / (3 * beta)
    scale = (3 * beta * t) ** (1.0 / 3.0)
    phase = a * X - 2 * t * alpha**3 / (27 * beta**2)
    return complex(np.exp(1j * phase) * airy_integral(Y / scale) / scale)


def dispersive_kernel_closed_form(x: float, y: float, t: float, params: PdeParams) -> complex:
    """Airy-function value of the dispersive kernel for t > 0 (used as an oracle)."""
    alpha, beta, delta = params.alpha, params.beta, params.delta
    a = alpha / (3 * beta)
    X = x - y - t * delta
    Y = X - t * alpha**2 / (3 * beta)
    scale = (3 * beta * t) ** (1.0 / 3.0)
    phase = a * X - 2 * t * alpha**3 / (27 * beta**2)
    return complex(np.exp(1j * phase) * 2 * np.pi * airy(Y / scale)[0] / scale)


# ---------------------------------------------------------------------------
# serialization

_MAGIC = b"HNLSFLD1"


def write_field_csv(u: SpaceTimeField, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "t", "re", "im"])
        for n, tn in enumerate(u.t):
            for i, xi in enumerate(u.x):
                v = u.values[n, i]
                writer.writerow([f"{xi:.17g}", f"{tn:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_field_csv(path) -> SpaceTimeField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = np.unique(data[:, 0])
    t = np.unique(data[:, 1])
    if data.shape[0] != x.size * t.size:
        raise GridMismatch("field CSV is not a full tensor grid")
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(t.size, x.size)
    return SpaceTimeField(x, t, vals)


def write_field_binary(u: SpaceTimeField, path) -> None:
    """Layout: 8-byte magic, two little-endian uint64 (Nt, Nx), then float64 arrays
    x[Nx], t[Nt] and interleaved (re, im) values in time-major order."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", u.t.size, u.x.size))
        fh.write(u.x.astype("<f8").tobytes())
        fh.write(u.t.astype("<f8").tobytes())
        fh.write(u.values.astype("<c16").tobytes())


def read_field_binary(path) -> SpaceTimeField:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise GridMismatch("not a field file")
        nt, nx = struct.unpack("<QQ", fh.read(16))
        x = np.frombuffer(fh.read(8 * nx), dtype="<f8")
        t = np.frombuffer(fh.read(8 * nt), dtype="<f8")
        vals = np.frombuffer(fh.read(16 * nt * nx), dtype="<c16").reshape(nt, nx)
    return SpaceTimeField(x.copy(), t.copy(), vals.copy())
