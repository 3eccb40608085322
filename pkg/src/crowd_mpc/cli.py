"""Command line: ``crowd-mpc run`` and ``crowd-mpc report``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

from .config import ConfigError, dump_config, load_config
from .harness import (NON_STOP, STOP_AND_WAIT, EpisodeRecord, PairedResult, aggregate,
                      histogram, run_pairs, run_single)

FULL_SCALE = 2000
SEED_ENV = "CROWD_MPC_SEED"
HIST_NAMES = {"general": "general", STOP_AND_WAIT: "stop_and_wait", NON_STOP: "non_stop"}
PAIR_COLUMNS = ("seed", "situation", "dt_total", "dt_longest_wait", "mpc_completion",
                "pid_completion", "mpc_longest_wait", "pid_longest_wait", "mpc_stopped",
                "pid_stopped", "mpc_timed_out", "pid_timed_out", "collided")
TABLE_ROWS = (30, 20, 10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowd-mpc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate paired MPC/PID episodes")
    run.add_argument("--config", type=Path, help="key = value config file")
    run.add_argument("--n-ped", type=int, help="pedestrians per scenario")
    run.add_argument("--episodes", type=int, help="number of seeds (pairs)")
    run.add_argument("--seed", type=int, help=f"base seed (env {SEED_ENV} wins)")
    run.add_argument("--controller", choices=("mpc", "pid", "both"))
    run.add_argument("--workers", type=int)
    run.add_argument("--out", type=Path)
    run.add_argument("--trace", action="store_true", help="dump decisions, forces and QPs")
    run.add_argument("--full-scale", action="store_true", help=f"{FULL_SCALE} episodes")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="histograms and density table from finished runs")
    rep.add_argument("dirs", nargs="+", type=Path, help="run directories (searched recursively)")
    rep.add_argument("--bin", type=float, default=0.5, help="histogram bin width, s")
    rep.set_defaults(func=cmd_report)
    return parser


def config_from_args(args):
    cfg = load_config(args.config)
    if args.n_ped is not None:
        cfg.scenario.n_pedestrians = args.n_ped
    if args.episodes is not None:
        cfg.episodes = args.episodes
    if args.full_scale:
        cfg.episodes = FULL_SCALE
    if args.seed is not None:
        cfg.seed = args.seed
    if os.environ.get(SEED_ENV):
        try:
            cfg.seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    if args.controller is not None:
        cfg.controller = args.controller
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.out = str(args.out)
    if args.trace:
        cfg.trace = True
    return cfg.validate()


def _cell(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_histograms(out: Path, hists: dict) -> None:
    for key, name in HIST_NAMES.items():
        with open(out / f"hist_{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("bin_left", "bin_right", "count"))
            for lo, hi, count in hists.get(key, []):
                w.writerow((repr(lo), repr(hi), count))


def write_episodes(out: Path, records: list[EpisodeRecord]) -> None:
    ep_dir = out / "episodes"
    ep_dir.mkdir(parents=True, exist_ok=True)
    for rec in records:
        (ep_dir / f"seed{rec.seed}_{rec.controller}.csv").write_text(rec.to_csv())


def write_pairs(out: Path, pairs: list[PairedResult]) -> None:
    with open(out / "pairs.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PAIR_COLUMNS)
        for p in pairs:
            w.writerow([_cell(v) for v in (
                p.seed, p.situation, p.dt_total, p.dt_longest_wait, p.mpc.completion_time,
                p.pid.completion_time, p.mpc.longest_wait, p.pid.longest_wait,
                int(p.mpc.stopped), int(p.pid.stopped), int(p.mpc.timed_out),
                int(p.pid.timed_out), int(p.mpc.collided or p.pid.collided))])


def _fmt(value, digits=4) -> str:
    return "N.A." if value is None else f"{value:.{digits}f}"


def summary_block(summary: dict) -> str:
    c = summary["counts"]
    lines = [
        f"pedestrians: {summary['n_pedestrians']}   pairs: {summary['pairs']}",
        f"{'situation':<16}{'pairs':>7}  mean time difference MPC - PID (s)",
        f"{'General':<16}{c['general']:>7}  {_fmt(summary['mean_dt_total'])}  (total time)",
        f"{'Stop-and-Wait':<16}{c[STOP_AND_WAIT]:>7}  {_fmt(summary['mean_dt_longest_wait'])}"
        "  (longest wait)",
        f"{'Non-stop':<16}{c[NON_STOP]:>7}  {_fmt(summary['mean_dt_total_non_stop'])}"
        "  (total time)",
        f"collisions: {summary['collisions']}   timeouts: {summary['timeouts']}",
    ]
    return "\n".join(lines)


def single_summary(cfg, records: list[EpisodeRecord]) -> dict:
    done = [r.completion_time for r in records if not r.timed_out]
    return {
        "controller": cfg.controller,
        "n_pedestrians": cfg.scenario.n_pedestrians,
        "episodes": len(records),
        "mean_completion": sum(done) / len(done) if done else None,
        "stopped": sum(r.stopped for r in records),
        "timeouts": sum(r.timed_out for r in records),
        "collisions": sum(r.collided for r in records),
    }


def cmd_run(args) -> int:
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(dump_config(cfg))
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc}", file=sys.stderr)
        return 2
    trace_dir = out / "trace" if cfg.trace else None
    t0 = time.perf_counter()
    if cfg.controller == "both":
        pairs = run_pairs(cfg, trace_dir)
        write_episodes(out, [r for p in pairs for r in (p.mpc, p.pid)])
        write_pairs(out, pairs)
        summary = aggregate(pairs, cfg.hist_bin)
        write_histograms(out, summary["histograms"])
        summary["n_pedestrians"] = cfg.scenario.n_pedestrians
        summary["seed"] = cfg.seed
        summary["elapsed_s"] = round(time.perf_counter() - t0, 3)
        text = summary_block(summary)
    else:
        records = run_single(cfg, cfg.controller, trace_dir)
        write_episodes(out, records)
        summary = single_summary(cfg, records)
        summary["seed"] = cfg.seed
        text = json.dumps(summary, indent=2)
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(text)
    if summary["collisions"]:
        print(f"error: {summary['collisions']} episode(s) with a collision", file=sys.stderr)
        return 1
    return 0


def _read_pairs(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def density_table(rows: dict[int, dict]) -> str:
    header = f"{'pedestrians':<12}{'General':>12}{'Stop-and-Wait':>16}{'Non-stop':>12}"
    lines = [header]
    for n in TABLE_ROWS:
        s = rows.get(n)
        if s is None:
            cells = ("N.A.",) * 3
        else:
            cells = (_fmt(s["mean_dt_total"]), _fmt(s["mean_dt_longest_wait"]),
                     _fmt(s["mean_dt_total_non_stop"]))
        lines.append(f"{n:<12}{cells[0]:>12}{cells[1]:>16}{cells[2]:>12}")
    return "\n".join(lines)


def cmd_report(args) -> int:
    found = []
    for d in args.dirs:
        if not d.is_dir():
            print(f"error: no such directory: {d}", file=sys.stderr)
            return 1
        found.extend(sorted(d.rglob("summary.json")))
    runs = [p.parent for p in found if (p.parent / "pairs.csv").exists()]
    if not runs:
        print("error: no paired runs (summary.json + pairs.csv) found", file=sys.stderr)
        return 1
    if args.bin <= 0:
        print("error: --bin must be positive", file=sys.stderr)
        return 2
    table: dict[int, dict] = {}
    for run_dir in runs:
        summary = json.loads((run_dir / "summary.json").read_text())
        pairs = _read_pairs(run_dir / "pairs.csv")
        general = [float(p["dt_total"]) for p in pairs]
        waits = [float(p["dt_longest_wait"]) for p in pairs if p["situation"] == STOP_AND_WAIT]
        non_stop = [float(p["dt_total"]) for p in pairs if p["situation"] == NON_STOP]
        write_histograms(run_dir, {"general": histogram(general, args.bin),
                                   STOP_AND_WAIT: histogram(waits, args.bin),
                                   NON_STOP: histogram(non_stop, args.bin)})
        table[int(summary["n_pedestrians"])] = {
            "mean_dt_total": sum(general) / len(general) if general else None,
            "mean_dt_longest_wait": sum(waits) / len(waits) if waits else None,
            "mean_dt_total_non_stop": sum(non_stop) / len(non_stop) if non_stop else None,
        }
    text = density_table(table)
    target = args.dirs[0] / "density_table.txt"
    target.write_text(text + "\n")
    print(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
