from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hnls_halfline.errors import GridMismatch, ParameterError, TailTooLarge, UpperHalfPlane
from hnls_halfline.norms import hs_norm_line
from hnls_halfline.spectral import PdeParams, omega
from hnls_halfline.transforms import (
    GridFunction,
    GridKind,
    SpaceTimeField,
    extend_boundary,
    extend_field,
    extend_initial,
    half_line_ft,
    smooth_step,
    time_transform,
    time_transform_many,
    whole_line_propagator_apply,
)


def _exp_decay(L=40.0, n=8001):
    return GridFunction.sample(lambda x: np.exp(-x), 0.0, L, n)


def test_half_line_ft_zero():
    f = GridFunction(0.0, 10.0, np.zeros(101))
    assert half_line_ft(f, 0.3) == 0


def test_half_line_ft_exponential_real_k():
    f = _exp_decay()
    k = np.linspace(-5, 5, 11)
    assert np.max(np.abs(half_line_ft(f, k) - 1 / (1 + 1j * k))) < 1e-6


def test_half_line_ft_lower_half_plane():
    assert half_line_ft(_exp_decay(), -0.5j) == pytest.approx(2 / 3, abs=1e-6)


def test_half_line_ft_guards():
    f = _exp_decay()
    with pytest.raises(UpperHalfPlane):
        half_line_ft(f, 0.1j)
    with pytest.raises(TailTooLarge):
        half_line_ft(GridFunction.sample(lambda x: np.exp(-x), 0.0, 3.0, 301), 0.0)


def test_propagator_identity_at_zero():
    f = GridFunction.sample(lambda x: np.exp(-x**2), -20, 20, 513)
    out = whole_line_propagator_apply(f, 0.0, PdeParams(1.0, 1.0, 0.0))
    assert np.allclose(out.values, f.values, atol=1e-14)


def test_propagator_mode_phase():
    p = PdeParams(1.0, 1.0, 0.3)
    L, n = 20 * np.pi, 2049
    f = GridFunction.sample(lambda x: np.exp(2j * x), -L, L, n)
    out = whole_line_propagator_apply(f, 0.7, p)
    assert np.allclose(out.values, f.values * np.exp(-omega(2.0, p) * 0.7), atol=1e-10)


def test_propagator_conserves_l2():
    p = PdeParams(1.0, 1.0, 0.3)
    f = GridFunction.sample(lambda x: np.exp(-x**2) * (1 + 0.5j * x), -30, 30, 1025)
    out = whole_line_propagator_apply(f, 2.0, p)
    assert np.linalg.norm(out.values[:-1]) == pytest.approx(np.linalg.norm(f.values[:-1]), rel=1e-12)


def test_time_transform_examples():
    T = 2.0
    zero = GridFunction(0.0, T, np.zeros(21), GridKind.TEMPORAL)
    assert time_transform(zero, 1.0) == 0
    one = GridFunction(0.0, T, np.ones(21), GridKind.TEMPORAL)
    assert time_transform(one, 0.0) == pytest.approx(T)
    assert time_transform(one, 1.0, t_end=1.0) == pytest.approx(math.e - 1)


def test_time_transform_exact_for_cubics():
    t = np.linspace(0, 1.5, 31)
    h = GridFunction(0.0, 1.5, 1 - 2 * t + t**3, GridKind.TEMPORAL)
    kappa = np.array([0.3 + 2j, -4.0 + 30j, 1e-6])
    s = np.linspace(0, 1.5, 200001)
    for kap in kappa:
        ref = np.trapezoid(np.exp(kap * s) * (1 - 2 * s + s**3), s)
        assert abs(time_transform_many(h, np.array([kap]))[0] - ref) < 1e-8 * max(1, abs(ref))


def test_extend_initial_zero_and_slope():
    z = GridFunction(0.0, 10.0, np.zeros(201))
    assert np.all(extend_initial(z).values == 0)
    f = GridFunction.sample(lambda x: np.exp(-x), 0.0, 20.0, 4001)
    e = extend_initial(f)
    mid = f.n - 1
    h = f.h
    assert e.values[mid] == pytest.approx(1.0)
    left = (e.values[mid] - e.values[mid - 1]) / h
    right = (e.values[mid + 1] - e.values[mid]) / h
    assert left == pytest.approx(-1.0, abs=1e-2)
    assert right == pytest.approx(-1.0, abs=1e-2)
    # central slope across the junction is second-order accurate
    assert (e.values[mid + 1] - e.values[mid - 1]) / (2 * h) == pytest.approx(-1.0, abs=1e-4)


def test_extend_initial_zero_policy_and_bad_input():
    f = GridFunction.sample(lambda x: np.exp(-x), 0.0, 10.0, 101)
    e = extend_initial(f, policy="zero")
    assert np.all(e.values[:100] == 0)
    with pytest.raises(ParameterError):
        extend_initial(f, policy="mirror")
    with pytest.raises(GridMismatch):
        extend_initial(GridFunction(1.0, 2.0, np.ones(5)))


def test_extension_norm_ratio_stable_under_refinement():
    ratios = []
    for n in (1025, 2049, 4097):
        f = GridFunction.sample(lambda x: np.exp(-((x - 3) ** 2)) + 0.5 * np.exp(-x), 0.0, 30.0, n)
        e = extend_initial(f)
        half = GridFunction(0.0, 30.0, f.values)
        ratios.append(hs_norm_line(e, 2.0) / hs_norm_line(extend_initial(half, "zero"), 0.0))
    assert max(ratios) / min(ratios) < 1.05


def test_extend_field_matches_rowwise_initial():
    x = np.linspace(0, 10, 201)
    vals = np.stack([np.exp(-x) * (1 + j) for j in range(3)])
    out = extend_field(vals, x[1] - x[0], 10.0)
    for j in range(3):
        assert np.allclose(out[j], extend_initial(GridFunction(0.0, 10.0, vals[j])).values)


def test_extend_boundary_examples():
    T, Tp = 1.0, 2.0
    zero = extend_boundary(GridFunction(0.0, T, np.zeros(101), GridKind.TEMPORAL), Tp)
    assert np.all(zero.values == 0)
    one = extend_boundary(GridFunction(0.0, T, np.ones(101), GridKind.TEMPORAL), Tp)
    t = one.grid
    assert np.all(one.values[t <= T + 1e-12] == 1)
    tail = one.values[t > T].real
    assert np.all(np.diff(tail) <= 1e-15)
    eta = 0.25 * (Tp - T)
    assert np.all(one.values[t >= Tp - eta - 1e-12] == 0)
    with pytest.raises(GridMismatch):
        extend_boundary(GridFunction(0.0, T, np.ones(101), GridKind.TEMPORAL), 1.005)


def test_space_time_field_validation():
    with pytest.raises(GridMismatch):
        SpaceTimeField(np.linspace(0, 1, 5), np.linspace(0, 1, 3), np.zeros((5, 3)))


@settings(max_examples=50, deadline=None)
@given(
    a=st.floats(-2, 2),
    b=st.floats(-2, 2),
    kap_re=st.floats(-5, 5),
    kap_im=st.floats(-40, 40),
)
def test_time_transform_is_linear(a, b, kap_re, kap_im):
    t = np.linspace(0, 1, 41)
    f = GridFunction(0.0, 1.0, np.sin(3 * t), GridKind.TEMPORAL)
    g = GridFunction(0.0, 1.0, np.exp(-t), GridKind.TEMPORAL)
    comb = GridFunction(0.0, 1.0, a * f.values + b * g.values, GridKind.TEMPORAL)
    kap = complex(kap_re, kap_im)
    lhs = time_transform(comb, kap)
    rhs = a * time_transform(f, kap) + b * time_transform(g, kap)
    assert abs(lhs - rhs) <= 1e-11 * (1 + abs(lhs) + abs(rhs))


@settings(max_examples=50, deadline=None)
@given(s=st.floats(-3, 4))
def test_smooth_step_range_and_symmetry(s):
    v = float(smooth_step(s))
    assert 0.0 <= v <= 1.0
    assert v + float(smooth_step(1 - s)) == pytest.approx(1.0)
