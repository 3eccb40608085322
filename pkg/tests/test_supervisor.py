import math

import pytest

from crowd_mpc.config import RunConfig
from crowd_mpc.supervisor import MPC, PID, Controller, control_step, fresh_pid
from crowd_mpc.vci import Crowd, PedestrianState
from crowd_mpc.vehicle import VehicleState, discretize, step_vehicle

CFG = RunConfig()


def wall(x, n=5):
    return Crowd.from_states([PedestrianState(k, (x, -1.0 + 0.5 * k), (0.0, 0.0), (x, -1.0 + 0.5 * k))
                              for k in range(n)])


def test_open_road_holds_speed():
    d, _, sol = control_step(VehicleState(0.0, 4.0), Crowd.empty(), 400.0, fresh_pid(CFG), CFG)
    assert d.source == MPC and d.feasible and sol.optimal
    assert d.u == pytest.approx(400.0, abs=1.0)
    assert math.isinf(d.front_gap)


def test_steady_hold_over_many_steps():
    ctrl = Controller(CFG, MPC, 4.0)
    model = discretize(CFG.vehicle, CFG.dt)
    x = VehicleState(0.0, 4.0)
    for _ in range(100):
        d = ctrl.step(x, Crowd.empty())
        assert d.source == MPC
        assert d.u == pytest.approx(400.0, abs=1.0)
        x = step_vehicle(model, x, d.u)
        assert abs(x.v - 4.0) <= 0.01


def test_wall_ahead_at_speed_falls_back():
    x = VehicleState(0.0, 20.0)
    d, _, sol = control_step(x, wall(9.0), 0.0, fresh_pid(CFG), CFG)
    assert d.source == PID and not d.feasible and not sol.optimal
    assert d.front_gap == pytest.approx(9.0)
    assert d.u == -CFG.vehicle.u_max  # reference speed is zero, far too fast


def test_standstill_accelerates():
    d, _, _ = control_step(VehicleState(0.0, 0.0), Crowd.empty(), 0.0, fresh_pid(CFG), CFG)
    assert d.source == MPC and d.u > 0


def test_mpc_respects_rate_limit():
    d, _, _ = control_step(VehicleState(0.0, 0.0), Crowd.empty(), 0.0, fresh_pid(CFG), CFG)
    assert abs(d.u) <= CFG.vehicle.du_max + 1e-6


def test_decisions_are_deterministic():
    crowd = wall(20.0)
    a = control_step(VehicleState(0.0, 4.0), crowd, 400.0, fresh_pid(CFG), CFG)[0]
    b = control_step(VehicleState(0.0, 4.0), crowd, 400.0, fresh_pid(CFG), CFG)[0]
    assert a == b


def test_source_and_bounds_invariants():
    model = discretize(CFG.vehicle, CFG.dt)
    ctrl = Controller(CFG, MPC, 4.0)
    x = VehicleState(0.0, 4.0)
    crowd = wall(22.0)
    u_prev = 0.0
    for _ in range(200):
        d = ctrl.step(x, crowd)
        assert (d.source == PID) == (not d.feasible)
        assert abs(d.u) <= CFG.vehicle.u_max
        if d.source == MPC:
            assert abs(d.u - u_prev) <= CFG.vehicle.du_max + 1e-6
            nxt = step_vehicle(model, x, d.u)
            assert nxt.v <= CFG.vehicle.v_max + 1e-6 and nxt.v >= CFG.vehicle.v_min - 1e-6
        u_prev = d.u
        x = step_vehicle(model, x, d.u)
    assert x.v < 0.5  # came to rest in front of the wall


def test_pid_controller_starts_cruising():
    ctrl = Controller(CFG, PID, 4.0)
    d = ctrl.step(VehicleState(0.0, 4.0), Crowd.empty())
    assert d.source == PID
    assert d.u == pytest.approx(400.0)


def test_unknown_kind():
    with pytest.raises(ValueError):
        Controller(CFG, "lqr")
