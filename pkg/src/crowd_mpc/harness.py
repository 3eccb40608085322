"""Paired MPC/PID Monte-Carlo episodes over random crossing crowds."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.io import mmwrite

from .config import RunConfig
from .supervisor import DECISION_COLUMNS, MPC, PID, Controller, footprint
from .vci import TRACE_COLUMNS, Crowd, advance, crowd_forces, trace_rows
from .vehicle import VehicleState, discretize, step_vehicle

EPISODE_COLUMNS = ("t", "s", "v", "u", "source", "front_gap", "min_ped_distance")
GENERAL_ONLY = "general-only"
STOP_AND_WAIT = "stop-and-wait"
NON_STOP = "non-stop"


@dataclass
class Scenario:
    seed: int
    crowd: Crowd
    vehicle: VehicleState


@dataclass
class EpisodeRecord:
    controller: str
    seed: int
    rows: list[tuple] = field(default_factory=list)
    completion_time: float = math.nan
    timed_out: bool = False
    longest_wait: float = 0.0
    stopped: bool = False
    collided: bool = False

    def column(self, name: str) -> np.ndarray:
        k = EPISODE_COLUMNS.index(name)
        return np.array([row[k] for row in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EPISODE_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


@dataclass
class PairedResult:
    seed: int
    mpc: EpisodeRecord
    pid: EpisodeRecord
    situation: str
    dt_total: float
    dt_longest_wait: float | None


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def generate_scenario(cfg: RunConfig, seed: int | None = None) -> Scenario:
    """Pedestrians uniform in the spawn rectangle, each heading to the far side."""
    sc = cfg.scenario
    if sc.n_pedestrians < 0:
        raise ValueError("n_pedestrians must be >= 0")
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    n = sc.n_pedestrians
    x = rng.uniform(sc.spawn_x_min, sc.spawn_x_max, n)
    y = rng.uniform(sc.spawn_y_min, sc.spawn_y_max, n)
    speed = rng.uniform(sc.desired_speed_min, sc.desired_speed_max, n)
    side = np.where(y >= 0.0, 1.0, -1.0)
    dest = np.stack([x, -side * sc.dest_offset], axis=1)
    pos = np.stack([x, y], axis=1)
    heading = dest - pos
    heading /= np.maximum(np.hypot(heading[:, 0], heading[:, 1]), 1e-12)[:, None]
    crowd = Crowd(
        ids=np.arange(n), pos=pos, vel=heading * speed[:, None], dest=dest,
        mass=np.full(n, cfg.crowd.mass), radius=np.full(n, cfg.crowd.radius),
        desired_speed=speed,
    )
    return Scenario(seed, crowd, VehicleState(sc.s0, sc.v0))


def rect_distance(pos: np.ndarray, x: VehicleState, length: float, width: float) -> np.ndarray:
    """Distance from points to the vehicle body; negative inside."""
    dx = np.abs(pos[:, 0] - x.s) - 0.5 * length
    dy = np.abs(pos[:, 1]) - 0.5 * width
    outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
    return np.where((dx < 0) & (dy < 0), np.maximum(dx, dy), outside)


def stop_windows(speeds: np.ndarray, dt: float, stop_speed: float, window: float
                 ) -> tuple[bool, float]:
    """(stopped, longest stop) over contiguous runs with speed below ``stop_speed``."""
    longest = 0
    run = 0
    for v in speeds:
        run = run + 1 if v < stop_speed else 0
        longest = max(longest, run)
    need = int(math.ceil(window / dt - 1e-9))
    if longest >= need:
        return True, longest * dt
    return False, 0.0


def run_episode(scenario: Scenario, kind: str, cfg: RunConfig,
                trace_dir: Path | None = None) -> EpisodeRecord:
    dt = cfg.dt
    model = discretize(cfg.vehicle, dt)
    on_qp = None
    if trace_dir is not None and cfg.trace:
        qp_dir = trace_dir / "qp" / f"seed{scenario.seed}_{kind}"
        qp_dir.mkdir(parents=True, exist_ok=True)
        on_qp = partial(dump_qp, qp_dir)
    ctrl = Controller(cfg, kind, scenario.vehicle.v, on_qp)
    crowd = scenario.crowd
    x = scenario.vehicle
    record = EpisodeRecord(kind, scenario.seed)
    decisions, traces = [], []
    max_steps = int(round(cfg.scenario.time_cap / dt))
    half_len = 0.5 * cfg.vehicle.length

    for k in range(max_steps + 1):
        t = k * dt
        if x.s + half_len >= cfg.scenario.finish_x:
            record.completion_time = t
            break
        if k == max_steps:
            record.completion_time = cfg.scenario.time_cap
            record.timed_out = True
            break
        dist = rect_distance(crowd.pos, x, cfg.vehicle.length, cfg.vehicle.width)
        min_dist = float(dist.min()) if len(dist) else math.inf
        if min_dist < 0.0:
            record.collided = True
        decision = ctrl.step(x, crowd)
        record.rows.append((t, x.s, x.v, decision.u, decision.source, decision.front_gap,
                            min_dist))
        forces = crowd_forces(crowd, footprint(x, cfg), cfg.crowd)
        if trace_dir is not None:
            decisions.append((t, x.s, x.v, decision.u, decision.source, decision.front_gap,
                              decision.qp_iterations))
            traces.extend(trace_rows(t, crowd, forces))
        crowd = advance(crowd, forces, dt, cfg.crowd)
        x = step_vehicle(model, x, decision.u)

    record.stopped, record.longest_wait = stop_windows(
        record.column("v") if record.rows else np.zeros(0), dt, cfg.stop_speed, cfg.stop_window)
    if trace_dir is not None:
        trace_dir.mkdir(parents=True, exist_ok=True)
        stem = f"seed{scenario.seed}_{kind}"
        _write_csv(trace_dir / f"{stem}_decisions.csv", DECISION_COLUMNS, decisions)
        _write_csv(trace_dir / f"{stem}_forces.csv", TRACE_COLUMNS, traces)
    return record


def dump_qp(directory: Path, qp) -> None:
    """Matrix Market dumps of one step: [H | F] and [G | h]."""
    stem = directory / f"step{qp.meta.get('step', 0):05d}"
    mmwrite(str(stem) + "_cost.mtx", np.column_stack([qp.H, qp.F]), precision=17)
    mmwrite(str(stem) + "_constraints.mtx", np.column_stack([qp.G, qp.h]), precision=17)


def _write_csv(path: Path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def classify_pair(mpc: EpisodeRecord, pid: EpisodeRecord) -> PairedResult:
    if mpc.seed != pid.seed:
        raise ValueError(f"paired episodes must share a seed ({mpc.seed} != {pid.seed})")
    if mpc.stopped and pid.stopped:
        situation = STOP_AND_WAIT
    elif not mpc.stopped and not pid.stopped:
        situation = NON_STOP
    else:
        situation = GENERAL_ONLY
    dt_wait = mpc.longest_wait - pid.longest_wait if situation == STOP_AND_WAIT else None
    return PairedResult(mpc.seed, mpc, pid, situation,
                        mpc.completion_time - pid.completion_time, dt_wait)


def histogram(values: Iterable[float], width: float = 0.5) -> list[tuple[float, float, int]]:
    vals = np.asarray(list(values), dtype=float)
    if vals.size == 0:
        return []
    idx = np.floor(vals / width + 1e-9).astype(int)
    lo, hi = int(idx.min()), int(idx.max())
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    return [((lo + i) * width, (lo + i + 1) * width, int(c)) for i, c in enumerate(counts)]


def _mean(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def aggregate(pairs: list[PairedResult], bin_width: float = 0.5) -> dict:
    """Means and histograms for the general, stop-and-wait and non-stop groups."""
    if not pairs:
        raise ValueError("aggregate needs at least one pair")
    general = [p.dt_total for p in pairs]
    waits = [p.dt_longest_wait for p in pairs if p.situation == STOP_AND_WAIT]
    non_stop = [p.dt_total for p in pairs if p.situation == NON_STOP]
    return {
        "pairs": len(pairs),
        "counts": {
            "general": len(general),
            STOP_AND_WAIT: len(waits),
            NON_STOP: len(non_stop),
            GENERAL_ONLY: sum(p.situation == GENERAL_ONLY for p in pairs),
        },
        "mean_dt_total": _mean(general),
        "mean_dt_longest_wait": _mean(waits),
        "mean_dt_total_non_stop": _mean(non_stop),
        "collisions": sum(p.mpc.collided + p.pid.collided for p in pairs),
        "timeouts": sum(p.mpc.timed_out + p.pid.timed_out for p in pairs),
        "histograms": {
            "general": histogram(general, bin_width),
            STOP_AND_WAIT: histogram(waits, bin_width),
            NON_STOP: histogram(non_stop, bin_width),
        },
    }


def run_pair(cfg: RunConfig, seed: int, trace_dir: Path | None = None) -> PairedResult:
    scenario = generate_scenario(cfg, seed)
    mpc = run_episode(scenario, MPC, cfg, trace_dir)
    pid = run_episode(generate_scenario(cfg, seed), PID, cfg, trace_dir)
    return classify_pair(mpc, pid)


def _pair_job(args) -> PairedResult:
    cfg, seed, trace_dir = args
    return run_pair(cfg, seed, trace_dir)


def _single_job(args) -> EpisodeRecord:
    cfg, seed, kind, trace_dir = args
    return run_episode(generate_scenario(cfg, seed), kind, cfg, trace_dir)


def episode_seeds(cfg: RunConfig) -> list[int]:
    return [(cfg.seed + i) % 2**64 for i in range(cfg.episodes)]


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def run_pairs(cfg: RunConfig, trace_dir: Path | None = None) -> list[PairedResult]:
    jobs = [(cfg, seed, trace_dir) for seed in episode_seeds(cfg)]
    return sorted(_map(_pair_job, jobs, cfg.workers), key=lambda p: p.seed)


def run_single(cfg: RunConfig, kind: str, trace_dir: Path | None = None) -> list[EpisodeRecord]:
    jobs = [(cfg, seed, kind, trace_dir) for seed in episode_seeds(cfg)]
    return sorted(_map(_single_job, jobs, cfg.workers), key=lambda r: r.seed)
