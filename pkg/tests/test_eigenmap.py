import math
from fractions import Fraction

import pytest

from polyharm.eigenmap import (
    EigenmapSpec,
    argmax_grid,
    critical_delta,
    critical_epsilon_exact,
    critical_grid_scan,
    eigenmap_lambda,
    energy_profile,
    epsilon_r,
    epsilon_r_derivatives,
    epsilon_r_exact,
    identity_eigenmap,
    iterated_tension_factor,
    iterated_tension_factor_exact,
    polynomial_eigenmap,
    r_energy,
    sphere_volume,
    verify_eigenmap_numeric,
)
from polyharm.numeric_oracle import SamplePlan

ORDERS = range(2, 7)


@pytest.mark.parametrize("r", ORDERS)
def test_critical_angle_is_unstable_maximum(r):
    delta = critical_delta(r)
    assert math.sin(delta) ** 2 == pytest.approx(1 / r)
    d1, d2 = epsilon_r_derivatives(delta, r)
    assert abs(d1) < 1e-12
    assert d2 < 0
    assert d2 == pytest.approx(-4 * math.cos(delta) ** (2 * r - 2))
    assert not energy_profile(r).stable


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", [0.2, 0.7, 1.3])
def test_derivatives_match_finite_differences(r, delta):
    h = 1e-5
    d1, d2 = epsilon_r_derivatives(delta, r)
    plus, mid, minus = epsilon_r(delta + h, r), epsilon_r(delta, r), epsilon_r(delta - h, r)
    assert d1 == pytest.approx((plus - minus) / (2 * h), abs=1e-8)
    assert d2 == pytest.approx((plus - 2 * mid + minus) / (h * h), abs=1e-4)


@pytest.mark.parametrize("r", ORDERS)
def test_grid_scan_finds_single_critical_point(r):
    (found,) = critical_grid_scan(r)
    spacing = (math.pi / 2) / (10**4 + 1)
    assert abs(found - critical_delta(r)) <= spacing


@pytest.mark.parametrize("r", ORDERS)
def test_grid_argmax_is_critical_angle(r):
    delta, spacing = argmax_grid(r)
    assert abs(delta - critical_delta(r)) <= spacing


def test_exact_epsilon():
    assert critical_epsilon_exact(2) == Fraction(1, 4)
    assert critical_epsilon_exact(3) == Fraction(4, 27)
    assert epsilon_r_exact(Fraction(1, 2), 4) == Fraction(1, 16)
    assert float(critical_epsilon_exact(5)) == pytest.approx(epsilon_r(critical_delta(5), 5))
    with pytest.raises(ValueError):
        epsilon_r_exact(Fraction(3, 2), 2)


def test_first_order_is_rejected():
    with pytest.raises(ValueError, match="r >= 2"):
        critical_delta(1)
    with pytest.raises(ValueError):
        epsilon_r(0.3, 1)
    with pytest.raises(ValueError):
        critical_grid_scan(0)


def test_angle_range_is_checked():
    with pytest.raises(ValueError):
        epsilon_r(2.0, 3)


@pytest.mark.parametrize("delta", [0.0, math.pi / 2])
def test_endpoint_angles_are_rejected(delta):
    with pytest.raises(ValueError, match="strictly between"):
        epsilon_r(delta, 2)
    with pytest.raises(ValueError, match="strictly between"):
        epsilon_r_derivatives(delta, 3)
    with pytest.raises(ValueError, match="strictly between"):
        r_energy(1.0, 2, delta, 2)


@pytest.mark.parametrize("t", [Fraction(0), Fraction(1)])
def test_endpoint_sine_squares_are_rejected(t):
    with pytest.raises(ValueError, match="strictly between"):
        epsilon_r_exact(t, 2)


def test_sphere_volume_and_energy():
    assert sphere_volume(1) == pytest.approx(2 * math.pi)
    assert sphere_volume(2) == pytest.approx(4 * math.pi)
    delta = critical_delta(2)
    assert r_energy(2.0, 2, delta, 2) == pytest.approx(4 * math.pi * 4 * 0.25)
    profile = energy_profile(2, lam=2.0, m=2)
    assert profile.energy == pytest.approx(4 * math.pi)
    assert profile.to_dict()["sin2_critical"] == "1/2"
    with pytest.raises(ValueError):
        energy_profile(2, lam=2.0)


def test_iterated_tension_factor_recursion():
    lam, t = Fraction(6), Fraction(1, 3)
    for k in range(1, 6):
        step = iterated_tension_factor_exact(lam, t, k - 1) * (-lam * (1 - t))
        assert iterated_tension_factor_exact(lam, t, k) == step
    delta = math.asin(math.sqrt(1 / 3))
    assert iterated_tension_factor(6.0, delta, 3) == pytest.approx(float(-(4**3)))
    assert iterated_tension_factor_exact(lam, t, 0) == 1


def test_eigenmap_lambda():
    assert eigenmap_lambda(1, 3) == 3
    assert eigenmap_lambda(2, 2) == 6
    with pytest.raises(ValueError):
        eigenmap_lambda(0, 2)


def test_eigenmap_spec_validation():
    with pytest.raises(ValueError):
        EigenmapSpec(2, 2, Fraction(0))
    with pytest.raises(ValueError):
        EigenmapSpec(3, 3, Fraction(3), identity_eigenmap(2).map)


def test_identity_eigenmap_passes():
    spec = identity_eigenmap(2)
    assert spec.lam == 2
    report = verify_eigenmap_numeric(spec, SamplePlan(m=2, count=20, seed=5))
    assert report.passed
    assert report.equation == "eigenmap"
    assert report.details["max_energy_deviation"] <= 1e-5


def test_polynomial_eigenmap_passes():
    spec = polynomial_eigenmap(2, 2)
    assert spec.lam == 6
    assert spec.target_dim == 8
    assert verify_eigenmap_numeric(spec, SamplePlan(m=3, count=10, seed=1)).passed


def test_wrong_lambda_fails():
    spec = identity_eigenmap(3)
    wrong = EigenmapSpec(spec.m, spec.target_dim, Fraction(4), spec.map)
    report = verify_eigenmap_numeric(wrong, SamplePlan(m=4, count=5))
    assert not report.passed
