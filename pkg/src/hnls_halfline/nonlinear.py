"""Solution operator of the forced half-line problem and its Picard iteration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cauchy import SolverConfig, solve_duhamel, solve_homogeneous, trace_at_zero
from .contours import ContourSpec
from .errors import IncompatibleData, NoContraction, RangeViolation, RegularityGate, TruncationInsufficient
from .ibvp import ReducedSolver, assemble_g0, reduced_contour
from .norms import compatibility_check, critical_power, high_reg_condition_check, strichartz_exponents
from .spectral import PdeParams
from .transforms import GridFunction, GridKind, SpaceTimeField, extend_field, extend_initial


def nonlinearity(u, params: PdeParams):
    """``kappa |u|^p u`` elementwise."""
    u = np.asarray(u, dtype=complex)
    if params.kappa == 0:
        return np.zeros_like(u)
    return params.kappa * np.abs(u) ** params.p * u


def extension_policy(s: float) -> str:
    """Reflection for s >= 1/2 data, extension by zero below."""
    return "zero" if s < 0.5 else "reflect"


@dataclass
class SolutionOperator:
    """Everything of the solution operator that does not depend on the iterate.

    The free part ``y``, its boundary trace and the contour are computed once; each
    application then costs one Duhamel solve, one node-transform pass and one
    evaluation of the representation on the grid.
    """

    u0: GridFunction
    g: GridFunction
    config: SolverConfig
    params: PdeParams
    s: float = 1.0
    contour: ContourSpec | None = None
    y_full: SpaceTimeField = field(init=False)
    y_trace: GridFunction = field(init=False)

    def __post_init__(self):
        cfg = self.config
        if self.u0.n != cfg.Nx or self.g.n != cfg.Nt:
            raise ValueError("u0 and g must be sampled on the configuration grids")
        self.policy = extension_policy(self.s)
        ext = extend_initial(self.u0, self.policy, cfg.extension_cutoff)
        self.y_full = solve_homogeneous(ext, cfg, self.params)
        self.y_trace = trace_at_zero(self.y_full)
        if self.contour is None:
            zero = GridFunction(0.0, cfg.T, np.zeros(cfg.Nt), GridKind.TEMPORAL)
            g0_lin = assemble_g0(self.g, self.y_trace, zero, cfg.Tprime)
            self.contour = reduced_contour(
                g0_lin,
                self.params,
                density=cfg.contour_density,
                M=cfg.truncation_M,
                x_max=cfg.L,
                tail_tol=cfg.quad_tol,
            )

    @property
    def half(self) -> slice:
        return slice(self.config.Nx - 1, None)

    def forcing(self, u: SpaceTimeField) -> SpaceTimeField:
        cfg = self.config
        ext = extend_field(u.values, cfg.dx, cfg.L, self.policy, cfg.extension_cutoff)
        return SpaceTimeField(cfg.x_line, cfg.t, nonlinearity(ext, self.params))

    def apply(self, u: SpaceTimeField | None, times=None) -> SpaceTimeField:
        """``y + z^u + q^u`` on [0, L] at ``times`` (default: the whole grid)."""
        cfg = self.config
        times_idx = np.arange(cfg.Nt) if times is None else np.asarray(times)
        ts = cfg.t[times_idx]
        if u is None or self.params.kappa == 0:
            z_vals = np.zeros((cfg.Nt, cfg.Nx), dtype=complex)
            z_trace = np.zeros(cfg.Nt, dtype=complex)
        else:
            z = solve_duhamel(self.forcing(u), cfg, self.params)
            z_vals = z.values[:, self.half]
            z_trace = trace_at_zero(z).values
        g0 = assemble_g0(
            self.g,
            self.y_trace,
            GridFunction(0.0, cfg.T, z_trace, GridKind.TEMPORAL),
            cfg.Tprime,
        )
        q = ReducedSolver.from_forcing(g0, self.contour, self.params).evaluate(cfg.x, ts)
        vals = self.y_full.values[times_idx][:, self.half] + z_vals[times_idx] + q
        return SpaceTimeField(cfg.x, ts, vals)


def phi_map(u, u0: GridFunction, g: GridFunction, config: SolverConfig, params: PdeParams, s: float = 1.0) -> SpaceTimeField:
    """One application of the solution operator (builds the fixed parts from scratch)."""
    return SolutionOperator(u0, g, config, params, s).apply(u)


def linear_solution(u0, g, config: SolverConfig, params: PdeParams, s: float = 1.0, times=None) -> SpaceTimeField:
    """Solution of the linear problem (nonlinearity switched off)."""
    op = SolutionOperator(u0, g, config, params.with_kappa(0.0), s)
    return op.apply(None, times)


def sup_l2_distance(a: SpaceTimeField, b: SpaceTimeField) -> float:
    """``max_t ||a(., t) - b(., t)||_{L^2(0, L)}`` with trapezoid weights in x."""
    h = a.dx
    w = np.full(a.x.size, h)
    w[0] = w[-1] = 0.5 * h
    return float(np.sqrt(np.max(np.abs(a.values - b.values) ** 2 @ w)))


def check_gates(u0: GridFunction, g: GridFunction, params: PdeParams, s: float, small_data_tol: float = 1.0) -> str:
    """Raise when (s, p) or the data fall outside the theory; returns the solution-space label."""
    p = params.p
    if s > 0.5:
        if not compatibility_check(u0, g, s):
            raise IncompatibleData(f"u0(0) = {u0.values[0]:.6g} differs from g(0) = {g.values[0]:.6g}")
        if not high_reg_condition_check(s, p):
            raise RegularityGate(f"(s, p) = ({s}, {p}) violates the smoothness condition on the nonlinearity")
        return f"C([0,T]; H^{s}) (sup-in-time L2 surrogate)"
    if s == 0.5:
        raise RegularityGate("s = 1/2 is excluded")
    try:
        spec = strichartz_exponents(s, p)
    except RangeViolation as exc:
        raise RegularityGate(str(exc)) from exc
    if p == float(critical_power(s)):
        size = max(np.max(np.abs(u0.values)), np.max(np.abs(g.values)))
        if size > small_data_tol:
            raise RegularityGate("critical power requires small data")
    return f"C([0,T]; H^{s}) with L^{float(spec.mu):g}_t H^{{s,{float(spec.r):g}}}_x (sup-in-time L2 surrogate)"


@dataclass
class PicardDiagnostics:
    iterations: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    horizons: list = field(default_factory=list)
    subdivisions: int = 0
    concatenated: bool = False
    space: str = ""
    tolerances: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, default=float)


def _iterate(op: SolutionOperator, seed: SpaceTimeField | None, tol: float, max_iter: int):
    u = op.apply(None) if seed is None else seed
    distances, ratios = [], []
    rising = 0
    for n in range(1, max_iter + 1):
        new = op.apply(u)
        d = sup_l2_distance(new, u)
        distances.append(d)
        if len(distances) > 1 and distances[-2] > 0:
            ratio = d / distances[-2]
            ratios.append(ratio)
            rising = rising + 1 if ratio >= 1 else 0
        u = new
        if d <= tol:
            return u, distances, ratios, True
        if rising >= 3 or not math.isfinite(d):
            break
    return u, distances, ratios, False


def picard_solve(
    u0: GridFunction,
    g: GridFunction,
    config: SolverConfig,
    params: PdeParams,
    s: float = 1.0,
    *,
    seed: SpaceTimeField | None = None,
    min_steps: int = 16,
    small_data_tol: float = 1.0,
):
    """Fixed point of the solution operator with horizon halving on stagnation.

    Starts from the linear solution (or ``seed``).  If the successive distances
    stop shrinking for three iterations or ``max_picard`` is exceeded, the horizon
    is halved; the remainder is then solved from the attained terminal slice
    with time-shifted boundary data and the pieces are concatenated.
    """
    diag = PicardDiagnostics(space=check_gates(u0, g, params, s, small_data_tol))
    diag.tolerances = {
        "fixed_point_tol": config.fixed_point_tol,
        "quad_tol": config.quad_tol,
        "contour_density": config.contour_density,
    }
    pieces = []
    start_idx = 0
    current_u0 = u0
    steps_total = config.Nt - 1
    while start_idx < steps_total:
        steps = steps_total - start_idx
        while True:
            sub_cfg = config.replace(T=steps * config.dt, Nt=steps + 1)
            sub_g = GridFunction(0.0, sub_cfg.T, g.values[start_idx : start_idx + steps + 1], GridKind.TEMPORAL)
            try:
                op = SolutionOperator(current_u0, sub_g, sub_cfg, params, s)
            except TruncationInsufficient as exc:
                # short horizons make the extended boundary data steep; nothing smaller will help
                raise NoContraction(f"horizon of {steps} steps: {exc}") from exc
            sub_seed = seed if (seed is not None and start_idx == 0 and steps == steps_total) else None
            u, dists, ratios, ok = _iterate(op, sub_seed, config.fixed_point_tol, config.max_picard)
            diag.iterations.append(len(dists))
            diag.distances.append(dists)
            diag.ratios.append(ratios)
            if ok:
                break
            if steps // 2 < min_steps:
                raise NoContraction(f"no contraction on the minimal horizon of {steps} steps")
            steps //= 2
            diag.subdivisions += 1
        t0 = start_idx * config.dt
        diag.horizons.append([t0, t0 + steps * config.dt])
        pieces.append(u.values if not pieces else u.values[1:])
        start_idx += steps
        current_u0 = GridFunction(0.0, config.L, u.values[-1])
    diag.concatenated = len(pieces) > 1
    field_vals = np.concatenate(pieces, axis=0)
    return SpaceTimeField(config.x, config.t, field_vals), diag


def residual_check(u: SpaceTimeField, params: PdeParams) -> float:
    """Grid L2 norm of the equation residual with centred second-order stencils (interior only)."""
    v = u.values
    h, dt = u.dx, u.dt
    if v.shape[0] < 3 or v.shape[1] < 5:
        return 0.0
    c = v[1:-1, 2:-2]
    ut = (v[2:, 2:-2] - v[:-2, 2:-2]) / (2 * dt)
    row = v[1:-1]
    ux = (row[:, 3:-1] - row[:, 1:-3]) / (2 * h)
    uxx = (row[:, 3:-1] - 2 * c + row[:, 1:-3]) / h**2
    uxxx = (row[:, 4:] - 2 * row[:, 3:-1] + 2 * row[:, 1:-3] - row[:, :-4]) / (2 * h**3)
    res = 1j * ut + 1j * params.beta * uxxx + params.alpha * uxx + 1j * params.delta * ux - nonlinearity(c, params)
    return float(np.sqrt(h * dt * np.sum(np.abs(res) ** 2)))


def uniqueness_check(u0, g, config: SolverConfig, params: PdeParams, s: float = 1.0, seeds=(1, 2), scale: float = 0.05):
    """Run Picard from independently perturbed seeds; returns the largest sup distance between the limits.

    Agreement within ``10 * fixed_point_tol`` is the empirical uniqueness criterion; it says
    nothing beyond the solution space named in the diagnostics.
    """
    base = linear_solution(u0, g, config, params, s)
    amp = scale * float(np.max(np.abs(base.values))) or scale
    limits = []
    for sd in seeds:
        rng = np.random.default_rng(sd)
        noise = rng.standard_normal(base.values.shape) + 1j * rng.standard_normal(base.values.shape)
        seed = SpaceTimeField(base.x, base.t, base.values + amp * noise)
        u, _ = picard_solve(u0, g, config, params, s, seed=seed)
        limits.append(u.values)
    return float(max(np.max(np.abs(a - b)) for i, a in enumerate(limits) for b in limits[i + 1 :]))
