"""Utility families: values, inverse marginals, floors, validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stackrein import HaraUtility, LogUtility, PowerUtility


def test_power_inverse_marginal_roundtrip():
    u = PowerUtility(-9.0)
    v = np.array([0.5, 1.0, 37.5, 250.0])
    marginal = v ** (u.exponent - 1.0)
    assert np.allclose(u.inverse_marginal(marginal), v, rtol=1e-12)


def test_log_inverse_marginal_is_reciprocal():
    u = LogUtility()
    y = np.array([0.25, 1.0, 8.0])
    assert np.allclose(u.inverse_marginal(y), 1.0 / y, rtol=1e-14)
    assert np.allclose(u.value(np.e), 1.0, rtol=1e-14)


def test_hara_shifts_the_power_family():
    floor, b = 20.0, -9.0
    u = HaraUtility(floor, b)
    power = PowerUtility(b)
    v = np.array([1.0, 50.0, 120.0])
    assert np.allclose(u.value(v), power.value(v + floor), rtol=1e-14)
    y = np.array([1e-6, 1.0, 1e4])
    assert np.allclose(u.inverse_marginal(y),
                       power.inverse_marginal(y) - floor, rtol=1e-12)
    assert u.floor == floor
    assert power.floor == 0.0
    assert LogUtility().floor == 0.0


@pytest.mark.parametrize("build", [
    lambda: PowerUtility(0.0),
    lambda: PowerUtility(1.0),
    lambda: PowerUtility(1.5),
    lambda: HaraUtility(-1.0, -9.0),
    lambda: HaraUtility(10.0, 0.0),
])
def test_utility_validation(build):
    with pytest.raises(ValueError):
        build()


@settings(max_examples=50, deadline=None)
@given(
    exponent=st.floats(-20.0, 0.9).filter(lambda b: abs(b) > 1e-3),
    y=st.floats(1e-4, 1e4),
)
def test_power_marginal_inverse_property(exponent, y):
    u = PowerUtility(exponent)
    v = float(u.inverse_marginal(y))
    assert v > 0.0
    assert v ** (exponent - 1.0) == pytest.approx(y, rel=1e-9)


def test_power_value_is_increasing_and_concave():
    u = PowerUtility(-4.0)
    v = np.linspace(0.5, 10.0, 100)
    values = u.value(v)
    first = np.diff(values)
    assert np.all(first > 0.0)
    assert np.all(np.diff(first) < 0.0)
