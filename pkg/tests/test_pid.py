import numpy as np
import pytest
from hypothesis import given, strategies as st

from crowd_mpc.config import VehicleParams
from crowd_mpc.pid import PidState, pid_step, reference_speed
from crowd_mpc.vehicle import VehicleState, discretize, step_vehicle


def fresh():
    return PidState(300.0, 10.0, 100.0, 0.05)


@pytest.mark.parametrize("gap, expected", [(8.0, 0.0), (18.0, 4.0), (13.0, 2.0), (0.0, 0.0),
                                           (100.0, 4.0), (np.inf, 4.0)])
def test_reference_ramp(gap, expected):
    assert reference_speed(gap, 4.0, 8.0, 10.0) == pytest.approx(expected)


def test_reference_rejects_empty_buffer():
    with pytest.raises(ValueError):
        reference_speed(10.0, 4.0, 8.0, 0.0)


@given(st.floats(0, 40), st.floats(0, 40))
def test_reference_is_monotone_and_bounded(a, b):
    ra, rb = reference_speed(a, 4.0, 8.0, 10.0), reference_speed(b, 4.0, 8.0, 10.0)
    assert 0.0 <= ra <= 4.0
    if a <= b:
        assert ra <= rb


def test_on_target_zero_history():
    u, _ = pid_step(fresh(), 4.0, 4.0, 8000.0)
    assert u == 0.0


def test_hand_evaluated_step():
    u, state = pid_step(fresh(), 3.0, 4.0, 8000.0)
    assert u == pytest.approx(2300.5, abs=1e-9)
    assert state.integral == pytest.approx(-0.5)
    assert state.e_prev == -1.0


def test_clamped_output_freezes_integral():
    u, state = pid_step(fresh(), 0.0, 4.0, 8000.0)  # raw 9202 N
    assert u == 8000.0
    assert state.integral == 0.0
    assert state.e_prev == -4.0


def test_rejects_bad_state():
    with pytest.raises(ValueError):
        PidState(1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        PidState(-1.0, 1.0, 1.0, 0.05)


@given(st.floats(-30, 30), st.floats(0, 20), st.floats(-1e4, 1e4), st.floats(-5, 5))
def test_output_within_limits(v, v_ref, integral, e_prev):
    state = PidState(300.0, 10.0, 100.0, 0.05, integral, e_prev)
    u, _ = pid_step(state, v, v_ref, 8000.0)
    assert -8000.0 <= u <= 8000.0


def closed_loop_error(seconds=600.0, v0=0.0, v_ref=4.0):
    params = VehicleParams()
    model = discretize(params, 0.05)
    x, state = VehicleState(0.0, v0), fresh()
    for _ in range(int(seconds / 0.05)):
        u, state = pid_step(state, x.v, v_ref, params.u_max)
        x = step_vehicle(model, x, u)
    return v_ref - x.v


def test_closed_loop_error_is_bounded_and_shrinking():
    early = closed_loop_error(20.0)
    late = closed_loop_error(300.0)
    assert 0.0 < late < early < 1.0
