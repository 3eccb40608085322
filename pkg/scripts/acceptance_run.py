"""Desk-scale density comparison: 30/20/10 pedestrians, paired MPC/PID episodes.

    python scripts/acceptance_run.py --episodes 200 --out results/desk
"""

import argparse
import os
import sys
from pathlib import Path

from crowd_mpc import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", type=Path, default=Path("results/desk"))
    ap.add_argument("--densities", type=int, nargs="+", default=[30, 20, 10])
    args = ap.parse_args()

    status = 0
    for n in args.densities:
        print(f"== {n} pedestrians")
        code = cli.main(["run", "--n-ped", str(n), "--episodes", str(args.episodes),
                         "--seed", str(args.seed), "--workers", str(args.workers),
                         "--out", str(args.out / f"n{n}")])
        status = status or code
    print("== density table")
    return status or cli.main(["report", str(args.out)])


if __name__ == "__main__":
    sys.exit(main())
