"""Run configuration: dataclass sections plus a flat ``section.key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, get_type_hints


class ConfigError(ValueError):
    pass


@dataclass
class VehicleParams:
    mass: float = 1000.0  # kg
    friction: float = 100.0  # N/(m/s), linearized
    u_max: float = 8000.0  # N
    du_max: float = 1000.0  # N per step
    v_max: float = 20.0  # m/s
    v_min: float = 0.0  # m/s
    length: float = 5.0  # m
    width: float = 2.0  # m

    def validate(self) -> None:
        _require(self.mass > 0, "vehicle.mass must be > 0")
        _require(self.friction >= 0, "vehicle.friction must be >= 0")
        _require(self.u_max > 0, "vehicle.u_max must be > 0")
        _require(self.du_max > 0, "vehicle.du_max must be > 0")
        _require(self.v_max > self.v_min >= 0, "need vehicle.v_max > vehicle.v_min >= 0")
        _require(self.length > 0 and self.width > 0, "vehicle footprint must be positive")


@dataclass
class MpcParams:
    horizon: int = 15
    v_ref: float = 4.0  # m/s
    d_safe: float = 8.0  # m, center-to-pedestrian
    q_weight: float = 1.0  # Q = q_weight * I_N
    corridor_margin: float = 0.5  # m added to half the vehicle width

    def validate(self) -> None:
        _require(self.horizon >= 1, "mpc.horizon must be >= 1")
        _require(self.v_ref >= 0, "mpc.v_ref must be >= 0")
        _require(self.d_safe > 0, "mpc.d_safe must be > 0")
        _require(self.q_weight >= 0, "mpc.q_weight must be >= 0")
        _require(self.corridor_margin >= 0, "mpc.corridor_margin must be >= 0")


@dataclass
class PidParams:
    kp: float = 300.0
    ki: float = 10.0
    kd: float = 100.0
    d_buffer: float = 10.0  # m

    def validate(self) -> None:
        _require(min(self.kp, self.ki, self.kd) >= 0, "pid gains must be >= 0")
        _require(self.d_buffer > 0, "pid.d_buffer must be > 0")


@dataclass
class CrowdParams:
    """Social-force parameters. Units: N, m, s, kg."""

    tau: float = 0.5
    a_rep: float = 300.0
    b_rep: float = 0.4
    k_body: float = 2000.0
    a_nav: float = 100.0
    a_veh: float = 600.0
    b_veh: float = 1.5
    lookahead: float = 1.0  # s; forward stretch of the vehicle field per m/s
    lateral_bias: float = 0.5
    veh_cutoff: float = 15.0
    static_speed: float = 0.2  # below this the vehicle is a static rectangle
    f_sat: float = 800.0
    neighbor_radius: float = 4.0
    max_speed: float = 2.0
    mass: float = 70.0
    radius: float = 0.3
    arrival_radius: float = 0.2

    def validate(self) -> None:
        positive = ("tau", "b_rep", "b_veh", "veh_cutoff", "f_sat", "neighbor_radius",
                    "max_speed", "mass", "radius")
        for name in positive:
            _require(getattr(self, name) > 0, f"crowd.{name} must be > 0")
        for name in ("a_rep", "k_body", "a_nav", "a_veh", "lookahead", "lateral_bias",
                     "static_speed", "arrival_radius"):
            _require(getattr(self, name) >= 0, f"crowd.{name} must be >= 0")


@dataclass
class ScenarioParams:
    n_pedestrians: int = 30
    spawn_x_min: float = 20.0
    spawn_x_max: float = 40.0
    spawn_y_min: float = -10.0
    spawn_y_max: float = 10.0
    dest_offset: float = 12.0  # |y| of the destination on the far side
    desired_speed_min: float = 1.0
    desired_speed_max: float = 1.4
    s0: float = 0.0
    v0: float = 4.0
    finish_x: float = 55.0  # front bumper must pass this
    time_cap: float = 90.0

    def validate(self) -> None:
        _require(self.n_pedestrians >= 0, "scenario.n_pedestrians must be >= 0")
        _require(self.spawn_x_max > self.spawn_x_min and self.spawn_y_max > self.spawn_y_min,
                 "scenario spawn rectangle must be nonempty")
        _require(0 <= self.desired_speed_min <= self.desired_speed_max,
                 "need 0 <= desired_speed_min <= desired_speed_max")
        _require(self.time_cap > 0, "scenario.time_cap must be > 0")
        _require(self.v0 >= 0, "scenario.v0 must be >= 0")


@dataclass
class SolverParams:
    max_iter: int = 500
    feas_tol: float = 1e-8
    kkt_tol: float = 1e-8

    def validate(self) -> None:
        _require(self.max_iter >= 1, "solver.max_iter must be >= 1")
        _require(self.feas_tol > 0 and self.kkt_tol > 0, "solver tolerances must be > 0")


@dataclass
class RunConfig:
    dt: float = 0.05
    episodes: int = 200
    seed: int = 7
    controller: str = "both"
    workers: int = 1
    out: str = "results"
    trace: bool = False
    stop_speed: float = 0.1  # m/s
    stop_window: float = 0.5  # s
    hist_bin: float = 0.5  # s
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    mpc: MpcParams = field(default_factory=MpcParams)
    pid: PidParams = field(default_factory=PidParams)
    crowd: CrowdParams = field(default_factory=CrowdParams)
    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    solver: SolverParams = field(default_factory=SolverParams)

    def validate(self) -> "RunConfig":
        _require(self.dt > 0, "dt must be > 0")
        _require(self.episodes >= 1, "episodes must be >= 1")
        _require(0 <= self.seed < 2**64, "seed must fit in 64 bits")
        _require(self.controller in ("mpc", "pid", "both"), "controller must be mpc, pid or both")
        _require(self.workers >= 1, "workers must be >= 1")
        _require(self.stop_speed > 0 and self.stop_window > 0, "stop thresholds must be > 0")
        _require(self.hist_bin > 0, "hist_bin must be > 0")
        for section in _SECTIONS:
            getattr(self, section).validate()
        _require(self.vehicle.friction * self.dt / self.vehicle.mass < 1,
                 "friction * dt / mass must be < 1")
        return self


_SECTIONS = ("vehicle", "mpc", "pid", "crowd", "scenario", "solver")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _coerce(raw: str, typ: Any, key: str) -> Any:
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def flat_items(cfg: RunConfig) -> list[tuple[str, Any]]:
    items = []
    for f in dataclasses.fields(cfg):
        if f.name in _SECTIONS:
            section = getattr(cfg, f.name)
            items.extend((f"{f.name}.{g.name}", getattr(section, g.name))
                         for g in dataclasses.fields(section))
        else:
            items.append((f.name, getattr(cfg, f.name)))
    return items


def set_key(cfg: RunConfig, key: str, raw: Any) -> None:
    """Set ``key`` (dotted for section fields); ``raw`` strings are coerced."""
    target: Any = cfg
    name = key
    if "." in key:
        section, name = key.split(".", 1)
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section: {section}")
        target = getattr(cfg, section)
    hints = get_type_hints(type(target))
    if name not in hints or name in _SECTIONS:
        raise ConfigError(f"unknown config key: {key}")
    value = _coerce(raw, hints[name], key) if isinstance(raw, str) else raw
    setattr(target, name, value)


def parse_config(text: str, cfg: RunConfig | None = None) -> RunConfig:
    cfg = cfg if cfg is not None else RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        set_key(cfg, key, value)
    return cfg


def load_config(path: str | Path | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        parse_config(Path(path).read_text(), cfg)
    return cfg


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{key} = {value!r}\n" if isinstance(value, float) else f"{key} = {value}\n"
                   for key, value in flat_items(cfg))
