import numpy as np
import pytest
from hypothesis import given, strategies as st

from crowd_mpc.config import VehicleParams
from crowd_mpc.vehicle import VehicleState, discretize, step_vehicle

DEFAULTS = VehicleParams()


def test_discretize_default_vehicle():
    model = discretize(DEFAULTS, 0.05)
    np.testing.assert_allclose(model.A, [[1.0, 0.05], [0.0, 0.995]], rtol=0, atol=1e-15)
    np.testing.assert_allclose(model.B, [0.0, 5e-5], rtol=0, atol=1e-18)


def test_discretize_small_dt_is_near_identity():
    model = discretize(DEFAULTS, 1e-9)
    np.testing.assert_allclose(model.A, np.eye(2), atol=1e-8)
    np.testing.assert_allclose(model.B, 0.0, atol=1e-8)


def test_frictionless_keeps_speed_exactly():
    model = discretize(VehicleParams(friction=0.0), 0.05)
    assert model.A[1, 1] == 1.0


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_discretize_rejects_nonpositive_dt(dt):
    with pytest.raises(ValueError):
        discretize(DEFAULTS, dt)


def test_discretize_rejects_unstable_step():
    with pytest.raises(ValueError):
        discretize(DEFAULTS, 10.0)  # 100 * 10 / 1000 = 1


@pytest.mark.parametrize("u, expected", [(0.0, (0.2, 3.98)), (8000.0, (0.2, 4.38))])
def test_step_examples(u, expected):
    model = discretize(DEFAULTS, 0.05)
    x = step_vehicle(model, VehicleState(0.0, 4.0), u)
    assert (x.s, x.v) == pytest.approx(expected, abs=1e-12)


def test_rest_is_fixed_point():
    model = discretize(DEFAULTS, 0.05)
    assert step_vehicle(model, VehicleState(0.0, 0.0), 0.0) == VehicleState(0.0, 0.0)


@given(st.floats(0.0, 20.0))
def test_friction_compensation_holds_speed(v):
    model = discretize(DEFAULTS, 0.05)
    x = VehicleState(0.0, v)
    for _ in range(50):
        x = step_vehicle(model, x, DEFAULTS.friction * v)
    assert x.v == pytest.approx(v, rel=1e-12, abs=1e-12)
