"""Reduced half-line problem: zero initial data, boundary forcing g0.

The solution is the contour integral
``q(x, t) = -(i / 2 pi) int exp(i k x - omega t) omega'(k) G(omega(k)) dk``
with ``G(kappa) = int_0^{T'} exp(kappa s) g0(s) ds`` evaluated once per node.
This module also holds the spectral identity checks built on that formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contours import ContourSpec, build_contour, c_pm, choose_truncation, gamma_path, select_lambda
from .errors import DegenerateSymmetry, GridMismatch, ParameterError, TimeZero, UpperHalfPlane
from .spectral import PdeParams, classify, nu_both, omega, omega_prime
from .transforms import GridFunction, GridKind, SpaceTimeField, extend_boundary, half_line_ft, time_transform_many

_NODE_CHUNK = 2048


def assemble_g0(
    g: GridFunction,
    ytrace: GridFunction,
    ztrace: GridFunction,
    Tprime: float,
    continuation: str = "constant",
) -> GridFunction:
    """Compactly supported boundary forcing for the reduced problem."""
    for other in (ytrace, ztrace):
        if other.n != g.n or abs(other.a - g.a) > 1e-12 or abs(other.b - g.b) > 1e-9 * max(1.0, g.b):
            raise GridMismatch("boundary data and traces must share one time grid")
    diff = GridFunction(g.a, g.b, g.values - ytrace.values - ztrace.values, GridKind.TEMPORAL)
    return extend_boundary(diff, Tprime, continuation)


def transform_envelope(g0: GridFunction, params: PdeParams, lam: float, branch: int = 3):
    """Integrand magnitude ``|omega'(k) k'(m) G(omega(k))|`` along a contour branch."""

    def env(m):
        k, dk = gamma_path(branch, np.asarray(m, dtype=float), params, lam, check=False)
        G = time_transform_many(g0, omega(k, params))
        return np.abs(omega_prime(k, params) * dk * G)

    return env


def reduced_contour(
    g0: GridFunction,
    params: PdeParams,
    *,
    density: float = 1.0,
    M: float | None = None,
    x_max: float = 1.0,
    tail_tol: float = 1e-6,
    margin: float = 1.5,
    order: int = 8,
) -> ContourSpec:
    """Contour adapted to the boundary forcing.

    When ``M`` is not given it is the smallest truncation at which the integrand
    envelope on both branches falls below ``tail_tol / density^2`` times its peak,
    so ``density`` refines panel size and truncation together.
    """
    cls = classify(params)
    lam = select_lambda(cls, params, margin)
    if M is None:
        tol = tail_tol / density**2
        probe = np.linspace(lam, lam + 60.0, 600)
        peak = max(np.max(transform_envelope(g0, params, lam, b)(probe)) for b in (1, 3))
        peak = max(peak, 1e-300)
        M = max(
            choose_truncation(lam, tol, envelope=lambda m, b=b: transform_envelope(g0, params, lam, b)(m) / peak)
            for b in (1, 3)
        )
        M = max(M, lam + 1.0)
    contour = build_contour(cls, params, lam, M, density, T_prime=g0.b, x_max=x_max, order=order)
    contour.meta["tail_tol"] = tail_tol
    return contour


@dataclass(frozen=True)
class ReducedSolver:
    """Node coefficients of the representation, reusable for any (x, t) and derivative order."""

    contour: ContourSpec
    params: PdeParams
    coeff: np.ndarray
    T_prime: float

    @classmethod
    def from_forcing(cls, g0: GridFunction, contour: ContourSpec, params: PdeParams) -> ReducedSolver:
        w = omega(contour.k, params)
        G = time_transform_many(g0, w)
        coeff = -1j / (2 * np.pi) * omega_prime(contour.k, params) * G * contour.measure
        return cls(contour, params, coeff, g0.b)

    def evaluate(self, xs, ts, deriv: int = 0) -> np.ndarray:
        """Values ``d^j q / dx^j`` at the tensor grid, shape (len(ts), len(xs))."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if np.any(ts > self.T_prime + 1e-12):
            raise ParameterError("evaluation times must not exceed T'")
        k = self.contour.k
        w = omega(k, self.params)
        c = self.coeff * (1j * k) ** deriv
        out = np.zeros((ts.size, xs.size), dtype=complex)
        for lo in range(0, k.size, _NODE_CHUNK):
            sl = slice(lo, lo + _NODE_CHUNK)
            time_part = np.exp(-np.outer(ts, w[sl])) * c[sl]
            space_part = np.exp(1j * np.outer(k[sl], xs))
            out += time_part @ space_part
        return out


def solve_reduced(g0: GridFunction, contour: ContourSpec, xs, ts, params: PdeParams) -> SpaceTimeField:
    solver = ReducedSolver.from_forcing(g0, contour, params)
    return SpaceTimeField(xs, ts, solver.evaluate(xs, ts))


def reduced_derivative(j: int, g0: GridFunction, contour: ContourSpec, xs, ts, params: PdeParams) -> SpaceTimeField:
    if j not in (0, 1, 2):
        raise ParameterError("derivative order must be 0, 1 or 2")
    solver = ReducedSolver.from_forcing(g0, contour, params)
    return SpaceTimeField(xs, ts, solver.evaluate(xs, ts, deriv=j))


# ---------------------------------------------------------------------------
# spectral identities

# one-sided third-order weights (unit spacing) at the end point
_D1_ONE_SIDED = np.array([-11.0, 18.0, -9.0, 2.0]) / 6.0
_D2_ONE_SIDED = np.array([35.0, -104.0, 114.0, -56.0, 11.0]) / 12.0


def boundary_derivatives(q: SpaceTimeField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``q(0,t)``, ``q_x(0,t)``, ``q_xx(0,t)`` from one-sided third-order stencils.

    Four points for the first derivative, five for the second; both errors are O(h^3).
    """
    if abs(q.x[0]) > 1e-12:
        raise GridMismatch("field must start at x = 0")
    h = q.dx
    d1 = q.values[:, :4] @ _D1_ONE_SIDED / h
    d2 = q.values[:, :5] @ _D2_ONE_SIDED / h**2
    return q.values[:, 0], d1, d2


def _time_index(q: SpaceTimeField, t: float) -> int:
    n = int(round((t - q.t[0]) / q.dt))
    if n < 0 or n >= q.t.size or abs(q.t[n] - t) > 1e-9 * max(1.0, abs(t)):
        raise GridMismatch("t must be a node of the field's time grid")
    return n


def _transforms_up_to(series: np.ndarray, q: SpaceTimeField, n: int, kappa: complex) -> complex:
    if n == 0:
        return 0j
    h = GridFunction(q.t[0], q.t[n], series[: n + 1], GridKind.TEMPORAL)
    return complex(time_transform_many(h, np.array([kappa]))[0])


def global_relation_terms(q: SpaceTimeField, g0: GridFunction, k: complex, t: float, params: PdeParams):
    """Left side and the three boundary terms of the global relation at (k, t)."""
    if np.imag(k) > 1e-14:
        raise UpperHalfPlane("the global relation holds for Im k <= 0")
    n = _time_index(q, t)
    w = complex(omega(k, params))
    qhat = half_line_ft(q.slice(n), k)
    _, d1, d2 = boundary_derivatives(q)
    g0t = complex(time_transform_many(g0, np.array([w]), t_end=t)[0]) if t > 0 else 0j
    g1t = _transforms_up_to(d1, q, n, w)
    g2t = _transforms_up_to(d2, q, n, w)
    lhs = np.exp(w * t) * qhat
    a, b, d = params.alpha, params.beta, params.delta
    terms = ((-b * k**2 + a * k + d) * g0t, (1j * b * k - 1j * a) * g1t, b * g2t)
    return lhs, terms, (g0t, g1t, g2t)


def global_relation_residual(q: SpaceTimeField, g0: GridFunction, k: complex, t: float, params: PdeParams) -> complex:
    lhs, terms, _ = global_relation_terms(q, g0, k, t, params)
    return complex(lhs - sum(terms))


def vanish_check(q: SpaceTimeField, contour: ContourSpec, t: float, params: PdeParams, x: float = 1.0) -> complex:
    """Contour integral of the symmetric combination of q-hat at nu+ and nu-.

    The integrand is analytic and decaying in D+, so the value should vanish.
    """
    n = _time_index(q, t)
    cls = classify(params)
    nu_p, nu_m = nu_both(contour.k, cls, params)
    nu_p = nu_p.real + 1j * np.minimum(nu_p.imag, 0.0)
    nu_m = nu_m.real + 1j * np.minimum(nu_m.imag, 0.0)
    qs = q.slice(n)
    qp = half_line_ft(qs, nu_p)
    qm = half_line_ft(qs, nu_m)
    k = contour.k
    denom = nu_m - nu_p
    bracket = ((nu_m - k) * qp - (nu_p - k) * qm) / denom
    return complex(np.sum(np.exp(1j * k * x) * bracket * contour.measure) / (2 * np.pi))


def reconstruct_boundary_transforms(
    qhat_plus: complex,
    qhat_minus: complex,
    g0t: complex,
    k: complex,
    t: float,
    params: PdeParams,
    nu_plus: complex | None = None,
    nu_minus: complex | None = None,
) -> tuple[complex, complex]:
    """Unknown boundary transforms from the global relation at nu+ and nu-."""
    if nu_plus is None or nu_minus is None:
        nu_plus, nu_minus = nu_both(k, classify(params), params)
    gap = nu_minus - nu_plus
    if abs(gap) < 1e-8 * (1 + abs(k)):
        raise DegenerateSymmetry(f"nu+ and nu- coincide at k = {k}")
    b, a = params.beta, params.alpha
    e = np.exp(omega(k, params) * t)
    g1t = e * (qhat_plus - qhat_minus) / (1j * b * (nu_plus - nu_minus)) + 1j * k * g0t
    g2t = e * ((b * nu_minus - a) * qhat_plus - (b * nu_plus - a) * qhat_minus) / (b**2 * gap) - k**2 * g0t
    return complex(g1t), complex(g2t)


# ---------------------------------------------------------------------------
# kernels from the half-line estimates


def branch_phase(m, params: PdeParams):
    """``i omega(k)`` along the left branch parametrised by Re k (a real cubic)."""
    a, b, d = params.alpha, params.beta, params.delta
    m = np.asarray(m)
    return -8 * b * m**3 + 8 * a * m**2 + 2 * (d - a**2 / b) * m - a * d / b


def branch_phase_slope(m, params: PdeParams):
    a, b, d = params.alpha, params.beta, params.delta
    return -24 * b * m**2 + 16 * a * m + 2 * (d - a**2 / b)


def decay_rate(m, params: PdeParams):
    """Imaginary part of the left branch point above Re k = m (analytic in m)."""
    rel = np.asarray(m, dtype=complex) - params.shift
    offset = params.discriminant / (3 * params.beta**2)
    return -math.sqrt(3.0) * rel * np.sqrt(1.0 - offset / (3.0 * rel**2))


def suplem_ratio(j: int, m_grid, params: PdeParams, lam: float) -> float:
    """``max |k(m)|^{2j} |tau'(m)| / (1 + tau(m)^2)^{(j+1)/3}`` on the left branch."""
    m = np.asarray(m_grid, dtype=float)
    if np.any(m < lam - 1e-12):
        raise ParameterError("m_grid must lie in [lambda, M]")
    k, dk = gamma_path(1, m, params, lam, check=False)
    tau = (1j * omega(k, params)).real
    dtau = np.abs((1j * omega_prime(k, params) * dk).real)
    ratio = np.abs(k) ** (2 * j) * dtau / (1.0 + tau**2) ** ((j + 1) / 3.0)
    return float(np.max(ratio))


def _graded_breaks(a: float, b: float, levels: int = 30) -> np.ndarray:
    """Breakpoints on [a, b] refined geometrically towards b."""
    width = b - a
    inner = b - width * 0.5 ** np.arange(1, levels + 1)
    return np.concatenate([[a], inner, [b]])


def _ray_start(X: float, t: float, params: PdeParams, c_minus: float) -> float:
    """Leftmost real node: beyond every stationary point, so that the phase slope
    satisfies ``sgn(t) (X + t tau'(m_S)) <= -1`` and the complex ray decays monotonically."""
    a, b, d = params.alpha, params.beta, params.delta
    const = 2 * (d - a**2 / b)
    need = (math.copysign(1.0, t) * X + 1.0) / abs(t)
    disc = 256 * a**2 + 96 * b * (const + need)
    root = (16 * a - math.sqrt(disc)) / (48 * b) if disc > 0 else c_minus
    return min(root, c_minus - 0.5) - 0.5


def _kernel_single(X: float, z: float, t: float, params: PdeParams, c_minus: float, nodes, weights) -> complex:
    a, b = params.shift, params.beta
    m_s = _ray_start(X, t, params, c_minus)
    fine = np.linspace(m_s, c_minus, 2001)
    rate = np.abs(X + t * branch_phase_slope(fine, params)) + z * math.sqrt(3.0) + 1.0
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(fine))])
    n_pan = max(4, int(math.ceil(cum[-1] / 2.0)))
    breaks = np.interp(np.linspace(0.0, cum[-1], n_pan + 1), cum, fine)
    breaks = np.concatenate([breaks[:-2], _graded_breaks(breaks[-2], c_minus)])
    left, width = breaks[:-1], np.diff(breaks)
    m = (left[:, None] + 0.5 * width[:, None] * (nodes[None, :] + 1)).ravel()
    wm = (0.5 * width[:, None] * weights[None, :]).ravel()
    s_real = np.sqrt(np.maximum(3 * (m - a) ** 2 - params.discriminant / (3 * b**2), 0.0))
    real_part = np.sum(wm * np.exp(-z * s_real + 1j * (m * X + t * branch_phase(m, params))))
    # ray m = m_S - r e^{i sgn(t) pi/6}, traversed from infinity towards m_S
    direction = np.exp(1j * math.copysign(math.pi / 6, t))
    r_max = (40.0 / (8 * b * abs(t))) ** (1 / 3)
    r_breaks = np.concatenate([[0.0], r_max * np.geomspace(1e-3, 1.0, 30)])
    rl, rw = r_breaks[:-1], np.diff(r_breaks)
    r = (rl[:, None] + 0.5 * rw[:, None] * (nodes[None, :] + 1)).ravel()
    wr = (0.5 * rw[:, None] * weights[None, :]).ravel()
    mc = m_s - r * direction
    ray = np.exp(-z * decay_rate(mc, params) + 1j * (mc * X + t * branch_phase(mc, params)))
    return complex(real_part + direction * np.sum(wr * ray))


def oscillatory_kernel_K(y, x, z: float, t: float, params: PdeParams, lam: float | None = None, order: int = 16):
    """``int_{-inf}^{c-} exp(i m (x - y) + i t tau(m)) exp(-z s(m)) dm``.

    For each ``x - y``: real Gauss panels sized by the local phase slope on
    ``[m_S, c-]``, graded towards ``c-`` (square-root zero of ``s`` when lambda = 0),
    and a complex ray from ``m_S`` on which both factors decay.
    """
    if t == 0:
        raise TimeZero("the kernel is singular at t = 0")
    if z < 0:
        raise ParameterError("z must be nonnegative")
    if lam is None:
        lam = select_lambda(classify(params), params)
    X = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    c_minus, _ = c_pm(params, lam)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    out = np.array([_kernel_single(float(v), z, t, params, c_minus, nodes, weights) for v in X.ravel()])
    out = out.reshape(X.shape)
    return out if (np.ndim(x) or np.ndim(y)) else complex(out[0])


# ---------------------------------------------------------------------------
# modified Laplace transform


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def modified_laplace_matrix(m_grid: np.ndarray, x_grid: np.ndarray, params: PdeParams) -> np.ndarray:
    """Kernel ``exp(-x s(m))`` sampled as (len(x_grid), len(m_grid))."""
    a = params.shift
    s = np.sqrt(np.maximum(3 * (m_grid - a) ** 2 - params.discriminant / (3 * params.beta**2), 0.0))
    return np.exp(-np.outer(x_grid, s))


def modified_laplace(
    f: GridFunction,
    direction: str,
    params: PdeParams,
    lam: float,
    out_domain: tuple[float, float] | None = None,
    n_out: int | None = None,
) -> GridFunction:
    """Forward: ``x -> int e^{-x s(m)} f(m) dm`` over ``m <= c-``; adjoint: ``m -> int_0^inf e^{-x s(m)} f(x) dx``.

    Integrals use trapezoid weights on the input grid, so forward and adjoint are
    exact transposes with respect to the weighted inner products.
    """
    c_minus, _ = c_pm(params, lam)
    n_out = f.n if n_out is None else n_out
    if direction == "forward":
        if f.b > c_minus + 1e-12:
            raise ParameterError("forward input must live on m <= c-")
        lo, hi = (0.0, 10.0) if out_domain is None else out_domain
        x_grid = np.linspace(lo, hi, n_out)
        K = modified_laplace_matrix(f.grid, x_grid, params)
        vals = K @ (_trapezoid_weights(f.n, f.h) * f.values)
        return GridFunction(lo, hi, vals, GridKind.SPATIAL)
    if direction == "adjoint":
        if f.a < -1e-12:
            raise ParameterError("adjoint input must live on x >= 0")
        lo, hi = (c_minus - 10.0, c_minus) if out_domain is None else out_domain
        if hi > c_minus + 1e-12:
            raise ParameterError("adjoint output must live on m <= c-")
        m_grid = np.linspace(lo, hi, n_out)
        K = modified_laplace_matrix(m_grid, f.grid, params)
        vals = K.T @ (_trapezoid_weights(f.n, f.h) * f.values)
        return GridFunction(lo, hi, vals, GridKind.SPATIAL)
    raise ParameterError("direction must be 'forward' or 'adjoint'")


def weighted_inner(f: GridFunction, g: GridFunction) -> complex:
    if f.n != g.n or abs(f.a - g.a) > 1e-12 or abs(f.b - g.b) > 1e-12:
        raise GridMismatch("inner product needs a shared grid")
    return complex(np.sum(_trapezoid_weights(f.n, f.h) * f.values * np.conj(g.values)))


def weighted_norm(f: GridFunction) -> float:
    return math.sqrt(max(weighted_inner(f, f).real, 0.0))
