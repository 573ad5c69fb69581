from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hnls_halfline.cauchy import SolverConfig
from hnls_halfline.errors import IncompatibleData, NoContraction, RegularityGate
from hnls_halfline.nonlinear import (
    SolutionOperator,
    check_gates,
    extension_policy,
    linear_solution,
    nonlinearity,
    phi_map,
    picard_solve,
    residual_check,
    sup_l2_distance,
    uniqueness_check,
)
from hnls_halfline.reference import fd_solve
from hnls_halfline.spectral import PdeParams
from hnls_halfline.transforms import GridFunction, GridKind, SpaceTimeField

CUBIC = PdeParams(1.0, 1.0, 0.0, kappa=1.0, p=2.0)
LINEAR = CUBIC.with_kappa(0.0)
complexes = st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False)


def small_config(n=129, **kw):
    return SolverConfig(T=1.0, L=30.0, Nx=n, Nt=n, extension_cutoff=1.5, **kw)


def small_data(cfg, amp=0.1):
    u0 = GridFunction(0.0, cfg.L, amp * np.exp(-((cfg.x - 10.0) ** 2) / (2 * 1.5**2)) + 0j)
    g = GridFunction(0.0, cfg.T, amp * np.exp(-(((cfg.t - 0.5) / 0.12) ** 2)) + 0j, GridKind.TEMPORAL)
    return u0, g


@pytest.fixture(scope="module")
def cubic_run():
    cfg = small_config()
    u0, g = small_data(cfg)
    u, diag = picard_solve(u0, g, cfg, CUBIC)
    return cfg, u0, g, u, diag


def test_nonlinearity_examples():
    assert nonlinearity(0.0, CUBIC) == 0
    assert nonlinearity(2.0, CUBIC) == pytest.approx(8.0)
    assert np.all(nonlinearity(np.ones(4), LINEAR) == 0)


@given(u=complexes, kr=st.floats(-3, 3), ki=st.floats(-3, 3), p=st.floats(0.5, 6))
def test_nonlinearity_modulus(u, kr, ki, p):
    params = PdeParams(1.0, 1.0, 0.0, kappa=complex(kr, ki), p=p)
    assert abs(nonlinearity(u, params)) == pytest.approx(abs(complex(kr, ki)) * abs(u) ** (p + 1), rel=1e-12, abs=1e-300)


@given(a=complexes, b=complexes)
def test_nonlinearity_local_lipschitz(a, b):
    bound = 3 * max(abs(a), abs(b)) ** 2 * abs(a - b)
    assert abs(nonlinearity(a, CUBIC) - nonlinearity(b, CUBIC)) <= bound * (1 + 1e-12) + 1e-12


def test_extension_policy():
    assert extension_policy(0.3) == "zero"
    assert extension_policy(1.0) == "reflect"


def test_phi_independent_of_iterate_when_linear(rng):
    cfg = small_config()
    u0, g = small_data(cfg)
    lin = linear_solution(u0, g, cfg, LINEAR)
    noise = SpaceTimeField(cfg.x, cfg.t, rng.normal(size=lin.values.shape) + 0j)
    assert np.max(np.abs(phi_map(noise, u0, g, cfg, LINEAR).values - lin.values)) == 0
    assert np.max(np.abs(phi_map(lin, u0, g, cfg, LINEAR).values - lin.values)) == 0


def test_linear_superposition(rng):
    cfg = small_config(truncation_M=20.0)
    u0a, ga = small_data(cfg)
    u0b = GridFunction(0.0, cfg.L, np.exp(-((cfg.x - 15.0) ** 2) / 4) * (1 + 0.5j))
    gb = GridFunction(0.0, cfg.T, np.sin(np.pi * cfg.t) ** 3 + 0j, GridKind.TEMPORAL)
    c1, c2 = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    mix0 = u0a.with_values(c1 * u0a.values + c2 * u0b.values)
    mixg = ga.with_values(c1 * ga.values + c2 * gb.values)
    lhs = linear_solution(mix0, mixg, cfg, LINEAR).values
    rhs = c1 * linear_solution(u0a, ga, cfg, LINEAR).values + c2 * linear_solution(u0b, gb, cfg, LINEAR).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(rhs))


def test_linear_solution_matches_reference():
    cfg = small_config(257)
    u0, g = small_data(cfg, amp=1.0)
    utm = linear_solution(u0, g, cfg, LINEAR).values[-1]
    fd = fd_solve(u0, g, cfg, LINEAR).values[-1]
    mask = cfg.x <= 0.85 * cfg.L
    assert np.linalg.norm((utm - fd)[mask]) <= 1e-3 * np.linalg.norm(fd[mask])


def test_restart_from_midpoint_matches_single_solve():
    cfg = small_config()
    u0, g = small_data(cfg)
    full = linear_solution(u0, g, cfg, LINEAR)
    half = (cfg.Nt - 1) // 2
    sub = cfg.replace(T=0.5, Nt=half + 1)
    first = linear_solution(u0, GridFunction(0.0, 0.5, g.values[: half + 1], GridKind.TEMPORAL), sub, LINEAR)
    second = linear_solution(
        GridFunction(0.0, cfg.L, first.values[-1]), GridFunction(0.0, 0.5, g.values[half:], GridKind.TEMPORAL), sub, LINEAR
    )
    assert np.max(np.abs(second.values[-1] - full.values[-1])) < 1e-3 * np.max(np.abs(full.values[-1]))


def test_picard_linear_converges_in_one_iteration():
    cfg = small_config()
    u0, g = small_data(cfg)
    u, diag = picard_solve(u0, g, cfg, LINEAR)
    assert diag.iterations == [1]
    assert np.array_equal(u.values, linear_solution(u0, g, cfg, LINEAR).values)


def test_picard_contracts(cubic_run):
    cfg, _, _, _, diag = cubic_run
    assert diag.iterations[0] <= 15
    assert all(r < 1 for r in diag.ratios[0])
    assert diag.distances[0][-1] <= cfg.fixed_point_tol
    assert not diag.concatenated
    assert "H^1.0" in diag.space


def test_picard_fixed_point_and_data(cubic_run):
    cfg, u0, g, u, _ = cubic_run
    op = SolutionOperator(u0, g, cfg, CUBIC)
    assert sup_l2_distance(op.apply(u), u) <= 2 * cfg.fixed_point_tol
    assert np.max(np.abs(u.values[:, 0] - g.values)) < 1e-5
    assert np.max(np.abs(u.values[0] - u0.values)) < 1e-5


def test_picard_matches_nonlinear_reference(cubic_run):
    cfg, u0, g, u, _ = cubic_run
    fd = fd_solve(u0, g, cfg, CUBIC, nonlinear=True).values[-1]
    mask = cfg.x <= 0.85 * cfg.L
    assert np.linalg.norm((u.values[-1] - fd)[mask]) <= 1e-3 * np.linalg.norm(fd[mask])


def test_picard_horizon_halving_concatenates(cubic_run):
    _, u0, g, ref, _ = cubic_run
    cfg = small_config(fixed_point_tol=2e-8, max_picard=3)
    u, diag = picard_solve(u0, g, cfg, CUBIC)
    assert diag.subdivisions >= 1 and diag.concatenated
    assert diag.horizons[0][0] == 0.0 and diag.horizons[-1][1] == pytest.approx(1.0)
    assert np.max(np.abs(u.values - ref.values)) < 1e-3 * np.max(np.abs(ref.values))


def test_picard_reports_no_contraction():
    cfg = small_config(65, max_picard=1)
    u0, g = small_data(cfg)
    with pytest.raises(NoContraction):
        picard_solve(u0, g, cfg, CUBIC, min_steps=16)


def test_uniqueness_from_perturbed_seeds():
    cfg = small_config(65)
    u0, g = small_data(cfg)
    assert uniqueness_check(u0, g, cfg, CUBIC) <= 10 * cfg.fixed_point_tol


def test_gates():
    cfg = small_config(65)
    u0, g = small_data(cfg)
    with pytest.raises(IncompatibleData):
        check_gates(u0, g.with_values(g.values + 1.0), CUBIC, 1.0)
    with pytest.raises(RegularityGate):
        check_gates(u0, g, PdeParams(1.0, 1.0, 0.0, 1.0, 1.0), 2.0)
    with pytest.raises(RegularityGate):
        check_gates(u0, g, CUBIC, 0.5)
    with pytest.raises(RegularityGate):
        check_gates(u0, g, PdeParams(1.0, 1.0, 0.0, 1.0, 12.0), 0.2)
    crit = PdeParams(1.0, 1.0, 0.0, 1.0, 10.0)
    assert "L^" in check_gates(u0, g, crit, 0.2)
    with pytest.raises(RegularityGate):
        check_gates(u0.with_values(u0.values * 100), g, crit, 0.2)
    # below 1/2 the boundary value is not a trace, so mismatched data pass
    check_gates(u0, g.with_values(g.values + 1.0), CUBIC, 0.2)


def _plane_wave(k, n, T=0.2, L=2 * np.pi):
    x = np.linspace(0.0, L, n)
    t = np.linspace(0.0, T, n)
    freq = -LINEAR.beta * k**3 + LINEAR.alpha * k**2 + LINEAR.delta * k
    return SpaceTimeField(x, t, np.exp(1j * (k * x[None, :] - freq * t[:, None])))


def test_residual_check_examples():
    zero = SpaceTimeField(np.linspace(0, 1, 20), np.linspace(0, 1, 20), np.zeros((20, 20), dtype=complex))
    assert residual_check(zero, CUBIC) == 0
    errs = [residual_check(_plane_wave(2.0, n), LINEAR) for n in (65, 129, 257)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.8)
