"""Social-force crowd model with a speed-dependent vehicle repulsion field.

Each pedestrian is a planar point mass driven by

    F_i = sum_j (f_r + f_c + f_n)(i, j) + f_v(i) + beta_i * f_d(i)

where the sum runs over neighbors within ``neighbor_radius``. All per-crowd
computations are vectorized over a :class:`Crowd` of parallel arrays; the
single-pedestrian functions are thin wrappers around the same code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import CrowdParams

DEFAULT_PARAMS = CrowdParams()


@dataclass(frozen=True)
class PedestrianState:
    id: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    destination: tuple[float, float]
    mass: float = DEFAULT_PARAMS.mass
    radius: float = DEFAULT_PARAMS.radius
    desired_speed: float = 1.2

    def __post_init__(self):
        if not self.mass > 0 or not self.radius > 0 or not self.desired_speed >= 0:
            raise ValueError(f"invalid pedestrian {self.id}: mass, radius must be > 0, "
                             "desired_speed >= 0")
        coords = (*self.position, *self.velocity, *self.destination)
        if len(coords) != 6 or not np.all(np.isfinite(coords)):
            raise ValueError(f"pedestrian {self.id} has non-finite or malformed coordinates")


@dataclass(frozen=True)
class VehicleFootprint:
    center: tuple[float, float]
    heading: tuple[float, float] = (1.0, 0.0)
    length: float = 5.0
    width: float = 2.0
    longitudinal_speed: float = 0.0

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0 and self.longitudinal_speed >= 0):
            raise ValueError("vehicle footprint needs length, width > 0 and speed >= 0")
        if abs(np.hypot(*self.heading) - 1.0) > 1e-9:
            raise ValueError("vehicle heading must be a unit vector")

    def moved(self, distance: float) -> "VehicleFootprint":
        hx, hy = self.heading
        cx, cy = self.center
        return VehicleFootprint((cx + distance * hx, cy + distance * hy), self.heading,
                                self.length, self.width, self.longitudinal_speed)


@dataclass(frozen=True)
class ForceBreakdown:
    repulsive: np.ndarray
    collision: np.ndarray
    navigational: np.ndarray
    vehicle: np.ndarray
    destination: np.ndarray
    beta: float
    total: np.ndarray
    static_vehicle: bool = False


@dataclass
class Crowd:
    """Parallel-array view of a list of pedestrians."""

    ids: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    dest: np.ndarray
    mass: np.ndarray
    radius: np.ndarray
    desired_speed: np.ndarray

    @classmethod
    def empty(cls) -> "Crowd":
        z2 = np.zeros((0, 2))
        z1 = np.zeros(0)
        return cls(np.zeros(0, dtype=int), z2, z2.copy(), z2.copy(), z1, z1.copy(), z1.copy())

    @classmethod
    def from_states(cls, peds: Sequence[PedestrianState]) -> "Crowd":
        if not peds:
            return cls.empty()
        return cls(
            ids=np.array([p.id for p in peds], dtype=int),
            pos=np.array([p.position for p in peds], dtype=float),
            vel=np.array([p.velocity for p in peds], dtype=float),
            dest=np.array([p.destination for p in peds], dtype=float),
            mass=np.array([p.mass for p in peds], dtype=float),
            radius=np.array([p.radius for p in peds], dtype=float),
            desired_speed=np.array([p.desired_speed for p in peds], dtype=float),
        )

    def to_states(self) -> list[PedestrianState]:
        return [
            PedestrianState(int(self.ids[k]), (float(self.pos[k, 0]), float(self.pos[k, 1])),
                            (float(self.vel[k, 0]), float(self.vel[k, 1])),
                            (float(self.dest[k, 0]), float(self.dest[k, 1])),
                            float(self.mass[k]), float(self.radius[k]),
                            float(self.desired_speed[k]))
            for k in range(len(self))
        ]

    def with_motion(self, pos: np.ndarray, vel: np.ndarray) -> "Crowd":
        return Crowd(self.ids, pos, vel, self.dest, self.mass, self.radius, self.desired_speed)

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class CrowdForces:
    repulsive: np.ndarray
    collision: np.ndarray
    navigational: np.ndarray
    vehicle: np.ndarray
    destination: np.ndarray
    beta: np.ndarray
    total: np.ndarray
    static_vehicle: bool = False

    def breakdown(self, k: int) -> ForceBreakdown:
        return ForceBreakdown(self.repulsive[k], self.collision[k], self.navigational[k],
                              self.vehicle[k], self.destination[k], float(self.beta[k]),
                              self.total[k], self.static_vehicle)


def vehicle_is_static(veh: VehicleFootprint, params: CrowdParams = DEFAULT_PARAMS) -> bool:
    return veh.longitudinal_speed < params.static_speed


def vehicle_field(pos: np.ndarray, veh: VehicleFootprint | None,
                  params: CrowdParams = DEFAULT_PARAMS) -> np.ndarray:
    """Vehicle repulsion on pedestrians at ``pos`` (shape (n, 2)).

    The moving vehicle projects its body forward by ``lookahead * speed``;
    the magnitude decays with the distance to that stretched rectangle and the
    direction carries a lateral component pushing pedestrians out of the path.
    Below ``static_speed`` the plain body rectangle acts as a static obstacle.
    """
    out = np.zeros_like(pos, dtype=float)
    if veh is None or len(pos) == 0:
        return out
    hx, hy = veh.heading
    rel = pos - np.asarray(veh.center, dtype=float)
    xi = rel[:, 0] * hx + rel[:, 1] * hy
    eta = -rel[:, 0] * hy + rel[:, 1] * hx

    static = vehicle_is_static(veh, params)
    front = 0.5 * veh.length + (0.0 if static else params.lookahead * veh.longitudinal_speed)
    rear = -0.5 * veh.length
    half_w = 0.5 * veh.width

    dx = xi - np.clip(xi, rear, front)
    dy = eta - np.clip(eta, -half_w, half_w)
    dist = np.hypot(dx, dy)
    near = np.flatnonzero(dist <= params.veh_cutoff)
    if near.size == 0:
        return out
    xi, eta, dx, dy, dist = xi[near], eta[near], dx[near], dy[near], dist[near]

    inside = dist <= 0.0
    safe = np.where(inside, 1.0, dist)
    ux = dx / safe
    uy = dy / safe
    side = np.where(eta >= 0.0, 1.0, -1.0)
    if static:
        if inside.any():
            # exit through the nearest edge
            gaps = np.stack([front - xi, xi - rear, half_w - eta, eta + half_w])
            edge = np.argmin(gaps, axis=0)
            ux = np.where(inside, np.select([edge == 0, edge == 1], [1.0, -1.0], 0.0), ux)
            uy = np.where(inside, np.select([edge == 2, edge == 3], [1.0, -1.0], 0.0), uy)
    else:
        uy = np.where(inside, side, uy + params.lateral_bias * side)
        norm = np.hypot(ux, uy)
        ux, uy = ux / norm, uy / norm

    mag = params.a_veh * np.exp(-dist / params.b_veh)
    out[near, 0] = mag * (ux * hx - uy * hy)
    out[near, 1] = mag * (ux * hy + uy * hx)
    return out


def vehicle_influence(ped: PedestrianState, veh: VehicleFootprint | None,
                      params: CrowdParams = DEFAULT_PARAMS) -> np.ndarray:
    return vehicle_field(np.array([ped.position], dtype=float), veh, params)[0]


def _pair_forces(crowd: Crowd, ii: np.ndarray, jj: np.ndarray, params: CrowdParams):
    """Summed pair forces on each pedestrian from interacting pairs (ii <- jj)."""
    n = len(crowd)
    diff = crowd.pos[ii] - crowd.pos[jj]  # from j to i
    dist = np.hypot(diff[:, 0], diff[:, 1])
    coincident = dist <= 0.0
    safe = np.where(coincident, 1.0, dist)
    nx = diff[:, 0] / safe
    ny = diff[:, 1] / safe
    if coincident.any():
        # fixed antisymmetric separation direction for coincident centers
        nx = np.where(coincident, np.sign(ii - jj).astype(float), nx)
        ny = np.where(coincident, 0.0, ny)

    rsum = crowd.radius[ii] + crowd.radius[jj]
    expo = np.exp((rsum - dist) / params.b_rep)
    rep = params.a_rep * expo
    col = params.k_body * np.maximum(0.0, rsum - dist)

    # tangent t = rot90(n); pass on the side the relative velocity already points to
    tx, ty = -ny, nx
    dv = crowd.vel[ii] - crowd.vel[jj]
    nav = params.a_nav * expo * np.where(dv[:, 0] * tx + dv[:, 1] * ty >= 0.0, 1.0, -1.0)

    def total(wx, wy):
        return np.stack([np.bincount(ii, wx, n), np.bincount(ii, wy, n)], axis=1)

    return total(rep * nx, rep * ny), total(col * nx, col * ny), total(nav * tx, nav * ty)


def destination_force(crowd: Crowd, params: CrowdParams = DEFAULT_PARAMS) -> np.ndarray:
    to_dest = crowd.dest - crowd.pos
    dist = np.hypot(to_dest[:, 0], to_dest[:, 1])
    going = dist > params.arrival_radius
    scale = np.where(going, crowd.desired_speed / np.where(going, dist, 1.0), 0.0)
    v_des = to_dest * scale[:, None]
    return crowd.mass[:, None] * (v_des - crowd.vel) / params.tau


def crowd_forces(crowd: Crowd, veh: VehicleFootprint | None,
                 params: CrowdParams = DEFAULT_PARAMS, mask: np.ndarray | None = None
                 ) -> CrowdForces:
    """Force breakdown for every pedestrian.

    ``mask[i, j]`` selects which pairs interact; by default every distinct
    pair closer than ``neighbor_radius``.
    """
    if mask is None:
        dx = crowd.pos[:, None, 0] - crowd.pos[None, :, 0]
        dy = crowd.pos[:, None, 1] - crowd.pos[None, :, 1]
        mask = dx * dx + dy * dy <= params.neighbor_radius ** 2
        np.fill_diagonal(mask, False)
    ii, jj = np.nonzero(mask)
    f_r, f_c, f_n = _pair_forces(crowd, ii, jj, params)
    f_v = vehicle_field(crowd.pos, veh, params)
    f_d = destination_force(crowd, params)
    beta = np.maximum(0.0, 1.0 - np.hypot(f_v[:, 0], f_v[:, 1]) / params.f_sat)
    total = f_r + f_c + f_n + f_v + beta[:, None] * f_d
    static = veh is not None and vehicle_is_static(veh, params)
    return CrowdForces(f_r, f_c, f_n, f_v, f_d, beta, total, static)


def total_force(ped: PedestrianState, neighbors: Sequence[PedestrianState],
                veh: VehicleFootprint | None, params: CrowdParams = DEFAULT_PARAMS
                ) -> ForceBreakdown:
    """Force on ``ped`` from an already radius-filtered neighbor list."""
    group = Crowd.from_states([ped, *neighbors])
    mask = np.zeros((len(group), len(group)), dtype=bool)
    mask[0, 1:] = True
    return crowd_forces(group, veh, params, mask).breakdown(0)


def advance(crowd: Crowd, forces: CrowdForces, dt: float,
            params: CrowdParams = DEFAULT_PARAMS) -> Crowd:
    """Semi-implicit Euler: velocity from force first, then position from new velocity."""
    vel = crowd.vel + dt * forces.total / crowd.mass[:, None]
    speed = np.hypot(vel[:, 0], vel[:, 1])
    over = speed > params.max_speed
    if over.any():
        vel[over] *= (params.max_speed / speed[over])[:, None]
    return crowd.with_motion(crowd.pos + dt * vel, vel)


def step_crowd(crowd, veh: VehicleFootprint | None, dt: float,
               params: CrowdParams = DEFAULT_PARAMS):
    """Advance a :class:`Crowd` (or a list of pedestrian states) by ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if isinstance(crowd, Crowd):
        return advance(crowd, crowd_forces(crowd, veh, params), dt, params)
    arrays = Crowd.from_states(crowd)
    return advance(arrays, crowd_forces(arrays, veh, params), dt, params).to_states()


TRACE_COLUMNS = ("t", "ped_id", "fr_x", "fr_y", "fc_x", "fc_y", "fn_x", "fn_y",
                 "fv_x", "fv_y", "fd_x", "fd_y", "beta", "veh_static")


def trace_rows(t: float, crowd: Crowd, forces: CrowdForces) -> list[list]:
    rows = []
    for k in range(len(crowd)):
        rows.append([t, int(crowd.ids[k]),
                     *forces.repulsive[k], *forces.collision[k], *forces.navigational[k],
                     *forces.vehicle[k], *forces.destination[k], forces.beta[k],
                     int(forces.static_vehicle)])
    return rows
