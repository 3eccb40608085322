"""Crowd rollout under a constant-speed vehicle and the front-pedestrian sequence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import CrowdParams, VehicleParams
from .vci import DEFAULT_PARAMS, Crowd, VehicleFootprint, advance, crowd_forces
from .vehicle import VehicleState

NO_PEDESTRIAN = 1e9


@dataclass(frozen=True)
class CrowdPrediction:
    horizon: int
    trajectories: np.ndarray  # (n_peds, horizon, 2)
    assumed_vehicle_speed: float
    ids: np.ndarray


@dataclass(frozen=True)
class FrontGapSequence:
    x_p: np.ndarray  # (horizon,), NO_PEDESTRIAN where nothing is ahead

    @property
    def present(self) -> np.ndarray:
        return self.x_p < NO_PEDESTRIAN


def predict(crowd: Crowd | list, veh: VehicleFootprint | None, horizon: int, dt: float,
            params: CrowdParams = DEFAULT_PARAMS) -> CrowdPrediction:
    """Roll the crowd forward ``horizon`` steps with the vehicle at frozen speed.

    Positions are for steps k+1 .. k+horizon.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not isinstance(crowd, Crowd):
        crowd = Crowd.from_states(crowd)
    traj = np.empty((len(crowd), horizon, 2))
    speed = veh.longitudinal_speed if veh is not None else 0.0
    for i in range(horizon):
        crowd = advance(crowd, crowd_forces(crowd, veh, params), dt, params)
        traj[:, i] = crowd.pos
        if veh is not None:
            veh = veh.moved(speed * dt)
    return CrowdPrediction(horizon, traj, speed, crowd.ids)


def front_positions(positions: np.ndarray, s: float, lane_y: float, half_width: float
                    ) -> np.ndarray:
    """Closest in-corridor longitudinal position ahead of ``s``.

    ``positions`` has shape (..., n_peds, 2); the result drops the pedestrian axis.
    """
    if positions.shape[-2] == 0:
        return np.full(positions.shape[:-2], NO_PEDESTRIAN)
    x = positions[..., 0]
    ahead = (x > s) & (np.abs(positions[..., 1] - lane_y) <= half_width)
    return np.where(ahead, x, NO_PEDESTRIAN).min(axis=-1)


def corridor_half_width(veh_params: VehicleParams, margin: float) -> float:
    return 0.5 * veh_params.width + margin


def front_gap_sequence(pred: CrowdPrediction, veh_state: VehicleState,
                       veh_params: VehicleParams, margin: float = 0.5,
                       lane_y: float = 0.0) -> FrontGapSequence:
    # vehicle drives along +x at y = lane_y
    half = corridor_half_width(veh_params, margin)
    x_p = front_positions(np.swapaxes(pred.trajectories, 0, 1), veh_state.s, lane_y, half)
    return FrontGapSequence(np.asarray(x_p, dtype=float).reshape(pred.horizon))
