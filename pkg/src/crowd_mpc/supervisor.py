"""Per-step controller: MPC when its QP is feasible, PID otherwise."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .mpc import PredictionMatrices, assemble_qp, build_prediction
from .pid import PidState, pid_step, reference_speed
from .predictor import (NO_PEDESTRIAN, corridor_half_width, front_gap_sequence, front_positions,
                        predict)
from .qp import QpProblem, QpSolution, solve
from .vci import Crowd, VehicleFootprint
from .vehicle import DiscreteModel, VehicleState, discretize

MPC = "mpc"
PID = "pid"
DECISION_COLUMNS = ("t", "s", "v", "u", "source", "front_gap", "qp_iterations")


@dataclass(frozen=True)
class ControlDecision:
    u: float
    source: str
    qp_iterations: int
    front_gap: float  # center-based, inf when nobody is ahead
    feasible: bool
    qp_status: str = ""


def footprint(x: VehicleState, cfg: RunConfig) -> VehicleFootprint:
    return VehicleFootprint((x.s, 0.0), (1.0, 0.0), cfg.vehicle.length, cfg.vehicle.width,
                            max(0.0, x.v))


def current_gap(crowd: Crowd, x: VehicleState, cfg: RunConfig) -> float:
    half = corridor_half_width(cfg.vehicle, cfg.mpc.corridor_margin)
    x_p = float(front_positions(crowd.pos, x.s, 0.0, half))
    return math.inf if x_p >= NO_PEDESTRIAN else x_p - x.s


def fresh_pid(cfg: RunConfig) -> PidState:
    return PidState(cfg.pid.kp, cfg.pid.ki, cfg.pid.kd, cfg.dt)


def pid_control(x: VehicleState, gap: float, pid_state: PidState, cfg: RunConfig
                ) -> tuple[float, PidState]:
    v_ref = reference_speed(gap, cfg.mpc.v_ref, cfg.mpc.d_safe, cfg.pid.d_buffer)
    return pid_step(pid_state, x.v, v_ref, cfg.vehicle.u_max)


def mpc_problem(x: VehicleState, crowd: Crowd, u_prev: float, cfg: RunConfig,
                model: DiscreteModel, mats: PredictionMatrices, step: int = 0) -> QpProblem:
    pred = predict(crowd, footprint(x, cfg), cfg.mpc.horizon, cfg.dt, cfg.crowd)
    x_p = front_gap_sequence(pred, x, cfg.vehicle, cfg.mpc.corridor_margin)
    return assemble_qp(model, x, u_prev, x_p, cfg.vehicle, cfg.mpc, mats, step)


def control_step(x: VehicleState, crowd: Crowd, u_prev: float, pid_state: PidState,
                 cfg: RunConfig, warm_start=None, model: DiscreteModel | None = None,
                 mats: PredictionMatrices | None = None, step: int = 0, on_qp=None
                 ) -> tuple[ControlDecision, PidState, QpSolution]:
    """Try the MPC; route any non-optimal solver outcome to the PID.

    ``on_qp`` (optional) is called with each assembled problem, for dumps.
    """
    model = model if model is not None else discretize(cfg.vehicle, cfg.dt)
    mats = mats if mats is not None else build_prediction(model, cfg.mpc.horizon)
    if not isinstance(crowd, Crowd):
        crowd = Crowd.from_states(crowd)
    gap = current_gap(crowd, x, cfg)
    qp = mpc_problem(x, crowd, u_prev, cfg, model, mats, step)
    if on_qp is not None:
        on_qp(qp)
    sol = solve(qp, warm_start, cfg.solver.max_iter, cfg.solver.feas_tol, cfg.solver.kkt_tol)
    if sol.optimal:
        u = float(np.clip(sol.U[0], -cfg.vehicle.u_max, cfg.vehicle.u_max))
        return ControlDecision(u, MPC, sol.iterations, gap, True, sol.status), pid_state, sol
    u, pid_state = pid_control(x, gap, pid_state, cfg)
    return ControlDecision(u, PID, sol.iterations, gap, False, sol.status), pid_state, sol


class Controller:
    """Stateful wrapper carrying u_prev, PID history and the QP warm start."""

    def __init__(self, cfg: RunConfig, kind: str = MPC, initial_speed: float = 0.0, on_qp=None):
        if kind not in (MPC, PID):
            raise ValueError(f"unknown controller kind {kind!r}")
        self.cfg = cfg
        self.kind = kind
        self.model = discretize(cfg.vehicle, cfg.dt)
        self.mats = build_prediction(self.model, cfg.mpc.horizon)
        self.u_prev = 0.0
        self.pid_state = fresh_pid(cfg)
        if kind == PID:
            # enter already cruising: integral holds the friction force at the initial speed
            self.pid_state = replace(self.pid_state, integral=-cfg.vehicle.friction * initial_speed)
        self.warm: list[int] = []
        self.last_source = PID if kind == PID else MPC
        self.steps = 0
        self.on_qp = on_qp

    def step(self, x: VehicleState, crowd: Crowd) -> ControlDecision:
        if self.kind == PID:
            gap = current_gap(crowd, x, self.cfg)
            u, self.pid_state = pid_control(x, gap, self.pid_state, self.cfg)
            decision = ControlDecision(u, PID, 0, gap, False, "")
        else:
            pid_state = self.pid_state
            if self.last_source == MPC:
                # fallback starts from zero history
                pid_state = fresh_pid(self.cfg)
            decision, pid_state, sol = control_step(
                x, crowd, self.u_prev, pid_state, self.cfg, self.warm, self.model, self.mats,
                self.steps, self.on_qp)
            self.pid_state = pid_state
            if sol.optimal:
                self.warm = sol.active_set
            self.last_source = decision.source
        self.u_prev = decision.u
        self.steps += 1
        return decision

