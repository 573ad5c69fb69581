"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line.

The lines are collected in the terminal summary ("acceptance criteria").
Runtime bounds are part of the pass condition where a criterion states one.
"""

from __future__ import annotations

import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from hnls_halfline import verify
from hnls_halfline.cauchy import SolverConfig, solve_homogeneous
from hnls_halfline.config import build_run_config
from hnls_halfline.nonlinear import SolutionOperator, linear_solution, picard_solve
from hnls_halfline.norms import fractional_time_seminorm, sigma_exponent, strichartz_exponents
from hnls_halfline.reference import convergence_study, fd_solve
from hnls_halfline.spectral import PdeParams
from hnls_halfline.transforms import GridFunction, GridKind

DEFAULT = PdeParams(1.0, 1.0, 0.0)
SEED = 20240601


def record(log, number, title, passed, detail):
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    log.append(line)
    print(line)
    assert passed, line


def _rel_l2(a, b, mask):
    return float(np.linalg.norm((a - b)[mask]) / np.linalg.norm(b[mask]))


@pytest.fixture(scope="module")
def spectral_rows():
    rng = np.random.default_rng(SEED)
    rows, seconds = {}, {}
    for label, params in verify.case_representatives(DEFAULT).items():
        start = time.perf_counter()
        rows[label] = {c.name.split("[")[0]: c for c in verify.spectral_checks(params, rng, label=label)}
        seconds[label] = time.perf_counter() - start
    return rows, seconds


def test_criterion_01_symmetry(spectral_rows, acceptance_log):
    rows, seconds = spectral_rows
    worst = max(r["symmetry"].value for r in rows.values())
    ok = all(r["symmetry"].passed for r in rows.values()) and max(seconds.values()) < 10
    record(acceptance_log, 1, "symmetry identity", ok, f"max rel {worst:.2e} <= 1e-10, slowest case {max(seconds.values()):.1f}s")


def test_criterion_02_lower_half_plane(spectral_rows, acceptance_log):
    rows, seconds = spectral_rows
    worst = max(r["nu_lower_half_plane"].value for r in rows.values())
    ok = worst <= 1e-12 and max(seconds.values()) < 10
    record(acceptance_log, 2, "Im nu on closure(D+)", ok, f"max Im {worst:.2e} <= 1e-12")


def test_criterion_03_vieta(spectral_rows, acceptance_log):
    rows, _ = spectral_rows
    worst = max(max(r["vieta_sum"].value, r["vieta_product"].value) for r in rows.values())
    record(acceptance_log, 3, "Vieta identities", worst <= 1e-10, f"max rel {worst:.2e} <= 1e-10")


def test_criterion_04_conservation(acceptance_log):
    start = time.perf_counter()
    cfg = SolverConfig(T=1.0, L=40.0, Nx=1024, Nt=256)
    y0 = GridFunction.sample(lambda x: np.exp(-(x**2) / 8) * np.exp(0.5j * x), -cfg.L, cfg.L, 2 * cfg.Nx - 1)
    y = solve_homogeneous(y0, cfg, DEFAULT)
    mass = np.sum(np.abs(y.values[:, :-1]) ** 2, axis=1)
    drift = float(np.max(np.abs(np.sqrt(mass / mass[0]) - 1)))
    seconds = time.perf_counter() - start
    record(acceptance_log, 4, "L2 conservation", drift <= 1e-10 and seconds < 30, f"drift {drift:.2e} <= 1e-10 over 256 slices, {seconds:.1f}s")


@pytest.fixture(scope="module")
def ibvp_rows():
    start = time.perf_counter()
    rows = {c.name: c for c in verify.ibvp_checks(DEFAULT, np.random.default_rng(SEED))}
    return rows, time.perf_counter() - start


def test_criterion_05_reduced_recovery(ibvp_rows, acceptance_log):
    rows, seconds = ibvp_rows
    b, i, m = rows["boundary_recovery"], rows["initial_recovery"], rows["recovery_monotone_under_doubling"]
    ok = b.passed and i.passed and m.passed and seconds < 120
    record(acceptance_log, 5, "reduced recovery", ok, f"boundary {b.value:.2e}, initial {i.value:.2e} (<= 1e-4), monotone {m.passed}, {seconds:.1f}s")


def test_criterion_06_t_prime_independence(ibvp_rows, acceptance_log):
    c = ibvp_rows[0]["t_prime_independence"]
    record(acceptance_log, 6, "T' independence", c.passed, f"sup diff {c.value:.2e} <= 5 x quad_tol = {c.threshold:.0e}")


def test_criterion_07_vanish(ibvp_rows, acceptance_log):
    c = ibvp_rows[0]["vanish_identity"]
    record(acceptance_log, 7, "vanish identity", c.passed, f"|integral|/||q|| {c.value:.2e} <= 1e-6")


def test_criterion_08_global_relation(ibvp_rows, acceptance_log):
    c = ibvp_rows[0]["global_relation"]
    record(acceptance_log, 8, "global relation", c.passed, f"worst rel residual {c.value:.2e} <= 1e-4 over 20 k")


def test_criterion_09_dispersive_decay(acceptance_log):
    start = time.perf_counter()
    spreads = {label: verify.spread(verify.dispersive_decay_profile(p)) for label, p in verify.case_representatives(DEFAULT).items()}
    airy = verify.airy_match(1.0)
    seconds = time.perf_counter() - start
    ok = max(spreads.values()) <= 2 and airy <= 0.02 and seconds < 60
    detail = ", ".join(f"{k} {v:.3f}" for k, v in spreads.items())
    record(acceptance_log, 9, "dispersive decay", ok, f"spreads {detail} (<= 2), Airy mismatch {airy:.1e} <= 2%, {seconds:.1f}s")


def test_criterion_10_kernel_decay(acceptance_log):
    value = verify.spread(verify.kernel_decay_profile(DEFAULT))
    others = {label: verify.spread(verify.kernel_decay_profile(p)) for label, p in (("zero", PdeParams(0.0, 1.0, 0.0)), ("negative", PdeParams(0.0, 1.0, -1.0)))}
    info = ", ".join(f"{k} {v:.2f}" for k, v in others.items())
    record(acceptance_log, 10, "oscillatory kernel decay", value <= 2, f"spread {value:.3f} <= 2 at (1,1,0); informational: {info}")


def test_criterion_11_suplem(acceptance_log):
    change = verify.suplem_stability(DEFAULT)
    record(acceptance_log, 11, "suplem truncation", change < 0.05, f"max relative change {change:.3f} < 5%")


def test_criterion_12_modified_laplace(acceptance_log):
    rows = {c.name: c for c in verify.modified_laplace_checks(DEFAULT, np.random.default_rng(SEED))}
    f, a, adj = rows["modified_laplace_forward_spread"], rows["modified_laplace_adjoint_spread"], rows["modified_laplace_adjoint_identity"]
    ok = f.passed and a.passed and adj.passed
    record(acceptance_log, 12, "modified Laplace", ok, f"forward {f.value:.2f}, adjoint {a.value:.2f} (<= 2), adjoint identity {adj.value:.1e} <= 1e-8")


def test_criterion_13_linear_oracle(acceptance_log):
    start = time.perf_counter()
    run = build_run_config({"numerics": {"Nx": 1024, "Nt": 1024, "tolerances": {"extension_cutoff": 1.5}}})
    cfg = run.solver
    u0, g = run.scenario.sample(cfg)
    utm = linear_solution(u0, g, cfg, run.params, times=[cfg.Nt - 1]).values[-1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fd = fd_solve(u0, g, cfg, run.params).values[-1]
    mask = cfg.x <= 0.85 * cfg.L
    err = _rel_l2(utm, fd, mask)

    # self-convergence on the 256-point family (levels 1, 2, 4 reach 1021 points)
    coarse = cfg.replace(Nx=256, Nt=256)

    def solve(level):
        c = coarse.replace(Nx=level * (coarse.Nx - 1) + 1, Nt=level * (coarse.Nt - 1) + 1)
        a, b = run.scenario.sample(c)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return c.dx, c.x, fd_solve(a, b, c, run.params).values[-1]

    rows = convergence_study(solve, [1, 2, 4], norm_region=(0.0, 0.85 * coarse.L))
    order = min(r[2] for r in rows[1:])
    seconds = time.perf_counter() - start
    ok = err <= 1e-3 and order >= 1.8 and seconds < 300
    record(acceptance_log, 13, "linear oracle equivalence", ok, f"rel L2 {err:.2e} <= 1e-3 on 1024x1024, FD order {order:.2f} >= 1.8, {seconds:.1f}s")


def _small_gaussian(cfg, amp=0.1):
    u0 = GridFunction(0.0, cfg.L, amp * np.exp(-((cfg.x - 10.0) ** 2) / (2 * 1.5**2)) + 0j)
    g = GridFunction(0.0, cfg.T, np.full(cfg.Nt, u0.values[0]), GridKind.TEMPORAL)
    return u0, g


def test_criterion_14_nonlinear(acceptance_log):
    start = time.perf_counter()
    params = PdeParams(1.0, 1.0, 0.0, kappa=1.0, p=2.0)
    cfg = SolverConfig(T=1.0, L=30.0, Nx=257, Nt=257, extension_cutoff=1.5)
    u0, g = _small_gaussian(cfg)
    u, diag = picard_solve(u0, g, cfg, params)
    iters = sum(diag.iterations)
    later = [r for ratios in diag.ratios for r in ratios[1:]]
    fd = fd_solve(u0, g, cfg, params, nonlinear=True).values[-1]
    err = _rel_l2(u.values[-1], fd, cfg.x <= 0.85 * cfg.L)
    lin = linear_solution(u0, g, cfg, params)
    flat, _ = picard_solve(u0, g, cfg, params.with_kappa(0.0))
    degenerate = float(np.max(np.abs(flat.values - lin.values)))
    phi_zero = float(np.max(np.abs(SolutionOperator(u0, g, cfg, params.with_kappa(0.0)).apply(u).values - lin.values)))
    seconds = time.perf_counter() - start
    ok = iters <= 15 and all(r < 1 for r in later) and err <= 1e-3 and max(degenerate, phi_zero) <= 1e-12 and seconds < 600
    record(
        acceptance_log,
        14,
        "nonlinear Picard",
        ok,
        f"{iters} iterations, ratios {', '.join(f'{r:.1e}' for r in diag.ratios[0])}, FD rel L2 {err:.2e}, "
        f"kappa=0 gap {max(degenerate, phi_zero):.1e}, {seconds:.1f}s",
    )


def test_criterion_15_exponents(acceptance_log):
    worst = Fraction(0)
    count = 0
    for s in (Fraction(k, 10) for k in range(5)):
        crit = 6 / (1 - 2 * s)
        for p in sorted({Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5), crit}):
            if p > crit:
                continue
            spec = strichartz_exponents(s, p)
            defect = 3 / Fraction(spec.mu) + 1 / Fraction(spec.r) - Fraction(1, 2)
            worst = max(worst, abs(defect))
            count += 1
    sig0, sig2 = sigma_exponent(0.0), sigma_exponent(2.0)
    ok = worst == 0 and sig0 == pytest.approx(1 / 6, abs=1e-15) and sig2 == pytest.approx(0.5, abs=1e-15)
    record(acceptance_log, 15, "exponent arithmetic", ok, f"{count} pairs with exact defect {worst}, sigma(0) = {sig0:.6f}, sigma(2) = {sig2:.6f}")


def test_criterion_16_fractional_seminorm(acceptance_log):
    z = GridFunction(0.0, 1.0, np.linspace(0.0, 1.0, 2049), GridKind.TEMPORAL)
    values = [fractional_time_seminorm(z, 0.5, panels=p) for p in (32, 64, 128)]
    worst = max(abs(v - 1.0) for v in values)
    record(acceptance_log, 16, "fractional seminorm", worst <= 1e-4, f"values {', '.join(f'{v:.7f}' for v in values)}; max error {worst:.1e} <= 1e-4")


def test_criterion_17_continuous_dependence(acceptance_log):
    params = PdeParams(1.0, 1.0, 0.0, kappa=1.0, p=2.0)
    cfg = SolverConfig(T=1.0, L=30.0, Nx=129, Nt=129, extension_cutoff=1.5)
    u0, g = _small_gaussian(cfg)
    base, _ = picard_solve(u0, g, cfg, params)
    rel = 1e-3
    rng = np.random.default_rng(SEED)
    bump_x = np.exp(-((cfg.x - rng.uniform(8, 14)) ** 2) / 2)
    bump_t = np.sin(np.pi * cfg.t / cfg.T) ** 2
    du0 = rel * np.linalg.norm(u0.values) / np.linalg.norm(bump_x) * bump_x
    dg = rel * np.max(np.abs(u0.values)) * bump_t
    pert, _ = picard_solve(u0.with_values(u0.values + du0), g.with_values(g.values + dg), cfg, params)
    change = float(np.max(np.linalg.norm(pert.values - base.values, axis=1)) / np.max(np.linalg.norm(base.values, axis=1)))
    record(acceptance_log, 17, "continuous dependence", change <= 1e-2, f"relative change {change:.2e} for 1e-3 data perturbation (ratio {change / rel:.2f})")
