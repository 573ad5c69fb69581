"""Method-of-lines finite-difference oracle on the truncated half-line [0, L].

Semi-discrete system ``u' = -beta D3 u + i alpha D2 u - delta D1 u - sigma u - i f(u)``
with fourth-order stencils, the Dirichlet value at x = 0 injected, one-sided
fourth-order closures next to the boundary, a quartic sponge ``sigma`` on the last
15% of the interval and zero data beyond x = L.  Time stepping is TR-BDF2
(L-stable, second order) with a single sparse LU shared by both stages.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cauchy import SolverConfig
from .errors import CFLViolation, InnerSolveDiverged
from .spectral import PdeParams
from .transforms import GridFunction, SpaceTimeField

TRBDF2_GAMMA = 2.0 - math.sqrt(2.0)
SPONGE_FRACTION = 0.15


def fd_weights(offsets, deriv: int) -> np.ndarray:
    """Finite-difference weights on integer ``offsets`` (unit spacing) for a derivative."""
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


_CENTRED = {3: list(range(-3, 4)), 2: list(range(-2, 3)), 1: list(range(-2, 3))}
_ONE_SIDED_LEN = {3: 7, 2: 6, 1: 5}


def sponge_profile(x: np.ndarray, L: float, strength: float) -> np.ndarray:
    ramp = np.clip((x - (1 - SPONGE_FRACTION) * L) / (SPONGE_FRACTION * L), 0.0, 1.0)
    return strength * ramp**4


@dataclass(frozen=True)
class DiscreteOperator:
    """Sparse operator on interior unknowns u_1..u_{N-2} plus the column fed by u(0)."""

    matrix: sp.csc_matrix
    boundary_column: np.ndarray
    x: np.ndarray


def build_operator(params: PdeParams, x: np.ndarray, sponge_strength: float = 20.0) -> DiscreteOperator:
    n_pts = x.size
    h = x[1] - x[0]
    L = x[-1]
    n = n_pts - 2  # u_0 is Dirichlet data, u_{N-1} = 0 at the far end
    coeffs = {3: -params.beta, 2: 1j * params.alpha, 1: -params.delta}
    rows, cols, vals = [], [], []
    bcol = np.zeros(n, dtype=complex)
    weight_cache = {}
    for i in range(1, n_pts - 1):
        for deriv, c in coeffs.items():
            if c == 0:
                continue
            offs = _CENTRED[deriv]
            if i + offs[0] < 0:
                offs = list(range(-i, -i + _ONE_SIDED_LEN[deriv]))
            key = (deriv, tuple(offs))
            if key not in weight_cache:
                weight_cache[key] = fd_weights(offs, deriv)
            w = weight_cache[key] * c / h**deriv
            for o, wv in zip(offs, w):
                j = i + o
                if j == 0:
                    bcol[i - 1] += wv
                elif 1 <= j <= n_pts - 2:
                    rows.append(i - 1)
                    cols.append(j - 1)
                    vals.append(wv)
    damp = sponge_profile(x[1:-1], L, sponge_strength)
    rows.extend(range(n))
    cols.extend(range(n))
    vals.extend(-damp)
    mat = sp.csc_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(n, n))
    return DiscreteOperator(mat, bcol, x)


def _nonlinear_term(u, params: PdeParams):
    if params.kappa == 0:
        return 0.0
    return -1j * params.kappa * np.abs(u) ** params.p * u


def fd_solve(
    u0: GridFunction,
    g: GridFunction,
    config: SolverConfig,
    params: PdeParams,
    nonlinear: bool = False,
    *,
    sponge_strength: float = 20.0,
    inner_tol: float = 1e-13,
    inner_max: int = 50,
    strict_cfl: bool = False,
) -> SpaceTimeField:
    """Finite-difference solution on ``config.x`` x ``config.t``.

    ``u0`` and ``g`` must be sampled on exactly these grids.  The implicit scheme
    tolerates any step; a step far beyond the explicit limit ``h^3 / beta`` is
    reported with a warning (or :class:`CFLViolation` when ``strict_cfl``).
    """
    x, t = config.x, config.t
    if u0.n != x.size or g.n != t.size:
        raise ValueError("u0 and g must be sampled on the configuration grids")
    h, dt = config.dx, config.dt
    cfl = dt * params.beta / h**3
    if cfl > 1e4:
        msg = f"time step is {cfl:.3g} times the explicit stability limit; accuracy may degrade"
        if strict_cfl:
            raise CFLViolation(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    op = build_operator(params, x, sponge_strength)
    A, bcol = op.matrix, op.boundary_column
    n = A.shape[0]
    gam = TRBDF2_GAMMA
    d = 0.5 * gam * dt  # equals (1 - gam) / (2 - gam) * dt
    lu = spla.splu((sp.identity(n, dtype=complex, format="csc") - d * A).tocsc())
    use_nl = nonlinear and params.kappa != 0

    def rhs(u, gval):
        out = A @ u + bcol * gval
        if use_nl:
            out = out + _nonlinear_term(u, params)
        return out

    def implicit(base, gval):
        """Solve v = base + d * (A v + bcol g + N(v)) by fixed point on N."""
        lin = base + d * bcol * gval
        v = lu.solve(lin)
        if not use_nl:
            return v
        prev_change = math.inf
        for _ in range(inner_max):
            v_new = lu.solve(lin + d * _nonlinear_term(v, params))
            change = np.max(np.abs(v_new - v))
            v = v_new
            if change <= inner_tol * (1.0 + np.max(np.abs(v))):
                return v
            if not np.isfinite(change) or (change > 10 * prev_change and change > 1e-3):
                break
            prev_change = change
        raise InnerSolveDiverged("nonlinear inner fixed-point iteration failed to converge")

    gv = g.values
    g_mid = np.interp(t[:-1] + gam * dt, t, gv.real) + 1j * np.interp(t[:-1] + gam * dt, t, gv.imag)
    out = np.zeros((t.size, x.size), dtype=complex)
    u = u0.values[1:-1].copy()
    out[0] = u0.values
    out[0, 0] = gv[0]
    c1 = 1.0 / (gam * (2 - gam))
    c2 = (1 - gam) ** 2 / (gam * (2 - gam))
    for step in range(t.size - 1):
        u_star = implicit(u + d * rhs(u, gv[step]), g_mid[step])
        u = implicit(c1 * u_star - c2 * u, gv[step + 1])
        if not np.all(np.isfinite(u)):
            raise InnerSolveDiverged("finite-difference solution blew up")
        out[step + 1, 0] = gv[step + 1]
        out[step + 1, 1:-1] = u
    return SpaceTimeField(x, t, out)


def l2_norm(values: np.ndarray, h: float) -> float:
    return float(math.sqrt(h * np.sum(np.abs(values) ** 2)))


def convergence_study(solve, levels, reference=None, norm_region=None):
    """Rows ``(h, error, order)`` for a solver evaluated at refinement levels.

    ``solve(level)`` returns ``(h, x, values)`` with ``values`` sampled on ``x``.
    Errors are measured on the coarsest grid against ``reference`` (a callable of x)
    or, when absent, against Richardson extrapolation of the two finest levels
    assuming second order.
    """
    results = [solve(level) for level in levels]
    x0 = results[0][1]
    mask = np.ones(x0.size, dtype=bool) if norm_region is None else (x0 >= norm_region[0]) & (x0 <= norm_region[1])
    samples = []
    for h, x, vals in results:
        samples.append(np.interp(x0, x, vals.real) + 1j * np.interp(x0, x, vals.imag))
    if reference is not None:
        exact = reference(x0)
    else:
        exact = samples[-1] + (samples[-1] - samples[-2]) / 3.0
    dx0 = x0[1] - x0[0]
    rows = []
    prev = None
    for (h, _, _), s in zip(results, samples):
        err = l2_norm((s - exact)[mask], dx0)
        order = math.nan
        if prev is not None and prev[1] > 0 and err > 0:
            order = math.log(prev[1] / err) / math.log(prev[0] / h)
        rows.append((h, err, order))
        prev = (h, err)
    return rows
