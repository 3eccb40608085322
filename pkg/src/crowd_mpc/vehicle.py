"""Longitudinal point-mass vehicle: M s'' + alpha s' = u, discretized with forward Euler."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import VehicleParams


@dataclass(frozen=True)
class VehicleState:
    s: float  # center position, m
    v: float  # speed, m/s

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.v], dtype=float)

    def front(self, params: VehicleParams) -> float:
        return self.s + 0.5 * params.length


@dataclass(frozen=True)
class DiscreteModel:
    A: np.ndarray
    B: np.ndarray
    dt: float


def discretize(params: VehicleParams, dt: float) -> DiscreteModel:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    decay = params.friction * dt / params.mass
    if decay >= 1:
        raise ValueError(f"unstable discretization: friction*dt/mass = {decay} >= 1")
    A = np.array([[1.0, dt], [0.0, 1.0 - decay]])
    B = np.array([0.0, dt / params.mass])
    return DiscreteModel(A=A, B=B, dt=dt)


def step_vehicle(model: DiscreteModel, x: VehicleState, u: float) -> VehicleState:
    # written out instead of A @ x so the result is exact in the hand-checkable cases
    A, B = model.A, model.B
    s = A[0, 0] * x.s + A[0, 1] * x.v + B[0] * u
    v = A[1, 0] * x.s + A[1, 1] * x.v + B[1] * u
    return VehicleState(float(s), float(v))
