"""Verification sweeps shared by the command line reports and the acceptance suite.

Every check returns :class:`Check` rows (name, value, threshold, passed) so the
reports and tests compare identical numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import airy

from .cauchy import dispersive_kernel
from .contours import build_contour, c_pm, select_lambda
from .ibvp import (
    ReducedSolver,
    global_relation_terms,
    modified_laplace,
    oscillatory_kernel_K,
    branch_phase_slope,
    reduced_contour,
    suplem_ratio,
    vanish_check,
    weighted_inner,
    weighted_norm,
)
from .spectral import DiscCase, PdeParams, classify, d_plus_indicator, nu_both, omega
from .transforms import GridFunction, GridKind, SpaceTimeField, extend_boundary


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def row(self) -> list[str]:
        return [self.name, f"{self.value:.6e}", f"{self.threshold:.6e}", "pass" if self.passed else "fail"]


def _le(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), float(threshold), bool(value <= threshold))


def case_representatives(params: PdeParams) -> dict[str, PdeParams]:
    """Same alpha and beta, with delta tuned to discriminant +1, 0 and -1."""
    a, b = params.alpha, params.beta
    out = {}
    for label, disc in (("positive", 1.0), ("zero", 0.0), ("negative", -1.0)):
        out[label] = PdeParams(a, b, (disc - a**2) / (3 * b), params.kappa, params.p)
    return out


# ---------------------------------------------------------------------------
# spectral sampling


def sample_off_cut(params: PdeParams, rng: np.random.Generator, n: int, radius: float = 6.0, eps: float = 1e-6):
    """``n`` uniform points of the square of half-width ``radius`` around the inflection point, off the cut."""
    cls = classify(params)
    out = np.empty(0, dtype=complex)
    while out.size < n:
        k = params.shift + rng.uniform(-radius, radius, 2 * n) + 1j * rng.uniform(-radius, radius, 2 * n)
        out = np.concatenate([out, k[cls.distance_to_cut(k) > eps]])
    return out[:n]


def sample_closure_d_plus(params: PdeParams, rng: np.random.Generator, n: int, radius: float = 6.0, eps: float = 1e-6):
    """Interior samples of D+ plus a tenth on its boundary curves, all off the cut."""
    cls = classify(params)
    n_edge = n // 10
    inner = np.empty(0, dtype=complex)
    while inner.size < n - n_edge:
        k = params.shift + rng.uniform(-radius, radius, 4 * n) + 1j * rng.uniform(0.0, radius, 4 * n)
        keep = (d_plus_indicator(k, params) <= 0) & (cls.distance_to_cut(k) > eps)
        inner = np.concatenate([inner, k[keep]])
    inner = inner[: n - n_edge]
    # boundary: hyperbola branches above the real axis and, when present, the real segment
    b = params.beta
    off = params.discriminant / (3 * b**2)
    im = rng.uniform(0.0, radius, n_edge)
    sign = rng.choice([-1.0, 1.0], n_edge)
    with np.errstate(invalid="ignore"):
        edge = params.shift + sign * np.sqrt((im**2 + off) / 3.0) + 1j * im
    edge = edge[np.isfinite(edge) & (cls.distance_to_cut(edge) > eps)]
    return np.concatenate([inner, edge])


def spectral_checks(params: PdeParams, rng: np.random.Generator, n: int = 10_000, label: str = "") -> list[Check]:
    """Symmetry, lower-half-plane and Vieta checks for one parameter set."""
    cls = classify(params)
    tag = f"{label or cls.case.value}"
    k = sample_off_cut(params, rng, n)
    w = omega(k, params)
    nu_p, nu_m = nu_both(k, cls, params)
    scale = 1 + np.abs(w)
    sym = max(np.max(np.abs(omega(nu_p, params) - w) / scale), np.max(np.abs(omega(nu_m, params) - w) / scale))
    ratio = params.alpha / params.beta
    vieta_sum = np.max(np.abs(nu_p + nu_m + k - ratio) / (1 + np.abs(k) + abs(ratio)))
    prod = k**2 - ratio * k - params.delta / params.beta
    vieta_prod = np.max(np.abs(nu_p * nu_m - prod) / (1 + np.abs(k) ** 2 + abs(params.delta / params.beta)))
    kd = sample_closure_d_plus(params, rng, n)
    dp, dm = nu_both(kd, cls, params)
    region = float(max(np.max(dp.imag), np.max(dm.imag)))
    return [
        _le(f"symmetry[{tag}]", sym, 1e-10),
        _le(f"nu_lower_half_plane[{tag}]", region, 1e-12),
        _le(f"vieta_sum[{tag}]", vieta_sum, 1e-10),
        _le(f"vieta_product[{tag}]", vieta_prod, 1e-10),
    ]


# ---------------------------------------------------------------------------
# reduced problem


def bump(t, a: float, b: float):
    """C-infinity bump supported on [a, b] with peak value one."""
    t = np.asarray(t, dtype=float)
    s = (2 * t - (a + b)) / (b - a)
    out = np.zeros_like(t)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1 - 1 / (1 - s[inside] ** 2))
    return out


def standard_boundary_forcing(T: float, n_steps: int = 200, amplitude: float = 1.0) -> GridFunction:
    """Compactly supported bump on [0.1 T, 1.5 T], sampled on [0, 2 T] with ``n_steps`` steps per T."""
    t = np.linspace(0.0, 2 * T, 2 * n_steps + 1)
    return GridFunction(0.0, 2 * T, amplitude * bump(t, 0.1 * T, 1.5 * T), GridKind.TEMPORAL)


def recovery_errors(g0: GridFunction, params: PdeParams, T: float, density: float, x_max: float = 5.0):
    """Boundary and initial recovery errors of the reduced solution (relative to max |g0|)."""
    contour = reduced_contour(g0, params, density=density, x_max=x_max)
    solver = ReducedSolver.from_forcing(g0, contour, params)
    ts = g0.grid[g0.grid <= T + 1e-12]
    xs = np.linspace(0.0, x_max, 201)
    scale = np.max(np.abs(g0.values))
    bdry = np.max(np.abs(solver.evaluate([0.0], ts)[:, 0] - g0.values[: ts.size])) / scale
    init = np.max(np.abs(solver.evaluate(xs, [0.0])[0])) / scale
    return float(bdry), float(init)


def t_prime_independence(g: GridFunction, params: PdeParams, x_max: float = 5.0, tail_tol: float = 1e-6) -> float:
    """Sup difference on [0, T] x [0, x_max] between the 2T and 3T extensions."""
    T = g.b
    xs = np.linspace(0.0, x_max, 101)
    fields = []
    for factor in (2, 3):
        g0 = extend_boundary(g, factor * T)
        contour = reduced_contour(g0, params, x_max=x_max, tail_tol=tail_tol)
        fields.append(ReducedSolver.from_forcing(g0, contour, params).evaluate(xs, g.grid))
    return float(np.max(np.abs(fields[0] - fields[1])))


def reduced_field(g0: GridFunction, params: PdeParams, T: float, x_max: float = 40.0, n_x: int = 4001):
    contour = reduced_contour(g0, params, x_max=x_max)
    ts = g0.grid[g0.grid <= T + 1e-12]
    xs = np.linspace(0.0, x_max, n_x)
    return SpaceTimeField(xs, ts, ReducedSolver.from_forcing(g0, contour, params).evaluate(xs, ts)), contour


def vanish_relative(q: SpaceTimeField, params: PdeParams, t: float, x: float = 1.0) -> float:
    """|vanish integral| / ||q(., t)||; the contour is truncated where exp(-M x) reaches 1e-10."""
    cls = classify(params)
    lam = select_lambda(cls, params)
    M = max(math.log(1e10) / x, lam + 1.0)
    contour = build_contour(cls, params, lam, M, 1.0, T_prime=0.0, x_max=x)
    n = int(round((t - q.t[0]) / q.dt))
    norm = math.sqrt(q.dx) * np.linalg.norm(q.values[n])
    return abs(vanish_check(q, contour, t, params, x)) / norm


def global_relation_worst(q: SpaceTimeField, g0: GridFunction, params: PdeParams, t: float, ks) -> float:
    """Largest residual over ``ks`` relative to the largest term at that k."""
    worst = 0.0
    for k in ks:
        lhs, terms, _ = global_relation_terms(q, g0, complex(k), t, params)
        scale = max(abs(lhs), *(abs(v) for v in terms), 1e-300)
        worst = max(worst, abs(lhs - sum(terms)) / scale)
    return worst


def lower_half_plane_ks(rng: np.random.Generator, n: int = 20, radius: float = 3.0) -> np.ndarray:
    return rng.uniform(-radius, radius, n) + 1j * rng.uniform(-1.0, 0.0, n)


def ibvp_checks(params: PdeParams, rng: np.random.Generator, T: float = 1.0) -> list[Check]:
    g0 = standard_boundary_forcing(T)
    rows = []
    errs = [recovery_errors(g0, params, T, d) for d in (1.0, 2.0, 4.0)]
    rows.append(_le("boundary_recovery", errs[0][0], 1e-4))
    rows.append(_le("initial_recovery", errs[0][1], 1e-4))
    mono = all(errs[i + 1][0] <= errs[i][0] and errs[i + 1][1] <= errs[i][1] for i in range(2))
    rows.append(Check("recovery_monotone_under_doubling", float(not mono), 0.0, mono))
    g = GridFunction(0.0, T, g0.values[: 201], GridKind.TEMPORAL)
    rows.append(_le("t_prime_independence", t_prime_independence(g, params), 5e-6))
    q, _ = reduced_field(g0, params, T)
    rows.append(_le("vanish_identity", vanish_relative(q, params, T), 1e-6))
    rows.append(_le("global_relation", global_relation_worst(q, g0, params, T, lower_half_plane_ks(rng)), 1e-4))
    return rows


# ---------------------------------------------------------------------------
# dispersion kernels


def decay_times() -> np.ndarray:
    return np.logspace(-2, 2, 9)


def dispersive_decay_profile(params: PdeParams, times=None, n_samples: int = 121) -> np.ndarray:
    """``sup |I(x, 0, t)| (beta t)^{1/3}`` per time, samples covering the Airy peak."""
    times = decay_times() if times is None else times
    out = []
    for t in times:
        scale = (3 * params.beta * t) ** (1 / 3)
        drift = t * (params.delta + params.alpha**2 / (3 * params.beta))
        X = drift + scale * np.linspace(-6.0, 2.0, n_samples)
        vals = [abs(dispersive_kernel(float(x), 0.0, float(t), params)) for x in X]
        out.append(max(vals) * (params.beta * t) ** (1 / 3))
    return np.asarray(out)


def airy_match(beta: float = 1.0, times=None) -> float:
    """Relative mismatch at x = y with alpha = delta = 0 against ``2 pi (3 beta t)^{-1/3} Ai(0)``."""
    times = decay_times() if times is None else times
    params = PdeParams(0.0, beta, 0.0)
    worst = 0.0
    for t in times:
        exact = 2 * np.pi * (3 * beta * t) ** (-1 / 3) * airy(0.0)[0]
        got = abs(dispersive_kernel(0.0, 0.0, float(t), params))
        worst = max(worst, abs(got - exact) / exact)
    return worst


def kernel_decay_profile(params: PdeParams, times=None, depths=(0.0, 0.25, 1.0)) -> np.ndarray:
    """``sup |K| |t|^{1/3}`` per time over x - y samples following the stationary points."""
    times = decay_times() if times is None else times
    lam = select_lambda(classify(params), params)
    c_minus, _ = c_pm(params, lam)
    out = []
    for t in times:
        ms = np.linspace(c_minus - 3.0, c_minus, 121)
        X = np.concatenate([-t * branch_phase_slope(ms, params), np.linspace(-5.0, 5.0, 101)])
        sup = max(np.max(np.abs(oscillatory_kernel_K(0.0, X, z, float(t), params, lam))) for z in depths)
        out.append(sup * abs(t) ** (1 / 3))
    return np.asarray(out)


def spread(profile) -> float:
    profile = np.asarray(profile)
    return float(np.max(profile) / np.min(profile))


def suplem_stability(params: PdeParams, M: float = 20.0, spacing: float = 1e-3) -> float:
    """Largest relative change of the suplem maxima (j = 0, 1, 2) when the truncation doubles."""
    lam = select_lambda(classify(params), params)
    worst = 0.0
    for j in (0, 1, 2):
        a = suplem_ratio(j, np.arange(lam, M + spacing / 2, spacing), params, lam)
        b = suplem_ratio(j, np.arange(lam, 2 * M + spacing / 2, spacing), params, lam)
        worst = max(worst, abs(b - a) / a)
    return worst


def random_bumps(rng: np.random.Generator, lo: float, hi: float, n: int, count: int = 20, terms: int = 16) -> list[np.ndarray]:
    """Positive random functions: sums of ``terms`` Gaussian bumps with random weights, centres and widths."""
    grid = np.linspace(lo, hi, n)
    out = []
    for _ in range(count):
        vals = np.zeros(n)
        for _ in range(terms):
            centre = rng.uniform(lo, hi)
            width = rng.uniform(0.05, 0.2) * (hi - lo)
            vals += rng.uniform(0.5, 1.5) * np.exp(-(((grid - centre) / width) ** 2))
        out.append(vals)
    return out


def modified_laplace_checks(params: PdeParams, rng: np.random.Generator, n: int = 801) -> list[Check]:
    lam = select_lambda(classify(params), params)
    c_minus, _ = c_pm(params, lam)
    m_lo, x_hi = c_minus - 10.0, 10.0
    fwd_ratios, adj_ratios, adjoint_err = [], [], 0.0
    for f_vals, g_vals in zip(random_bumps(rng, m_lo, c_minus, n), random_bumps(rng, 0.0, x_hi, n)):
        f = GridFunction(m_lo, c_minus, f_vals)
        g = GridFunction(0.0, x_hi, g_vals)
        Lf = modified_laplace(f, "forward", params, lam, out_domain=(0.0, x_hi), n_out=n)
        Lg = modified_laplace(g, "adjoint", params, lam, out_domain=(m_lo, c_minus), n_out=n)
        fwd_ratios.append(weighted_norm(Lf) / weighted_norm(f))
        adj_ratios.append(weighted_norm(Lg) / weighted_norm(g))
        lhs, rhs = weighted_inner(Lf, g), weighted_inner(f, Lg)
        adjoint_err = max(adjoint_err, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    return [
        _le("modified_laplace_forward_spread", spread(fwd_ratios), 2.0),
        _le("modified_laplace_adjoint_spread", spread(adj_ratios), 2.0),
        _le("modified_laplace_adjoint_identity", adjoint_err, 1e-8),
    ]


def dispersion_checks(params: PdeParams, rng: np.random.Generator) -> list[Check]:
    return [
        _le("dispersive_decay_spread", spread(dispersive_decay_profile(params)), 2.0),
        _le("airy_closed_form", airy_match(params.beta), 0.02),
        _le("kernel_decay_spread", spread(kernel_decay_profile(params)), 2.0),
        _le("suplem_truncation_change", suplem_stability(params), 0.05),
        *modified_laplace_checks(params, rng),
    ]


def disc_case_label(params: PdeParams) -> str:
    return {DiscCase.POSITIVE: "positive", DiscCase.ZERO: "zero", DiscCase.NEGATIVE: "negative"}[classify(params).case]
