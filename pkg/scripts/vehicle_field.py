"""Vehicle influence on a grid around the car for several speeds (CSV).

Columns: speed, x, y, fx, fy, magnitude. The car sits at the origin heading +x.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from crowd_mpc.config import CrowdParams, VehicleParams
from crowd_mpc.vci import VehicleFootprint, vehicle_field


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--speeds", type=float, nargs="+", default=[0.0, 1.0, 4.0, 8.0])
    ap.add_argument("--step", type=float, default=0.5)
    ap.add_argument("--out", type=Path, default=Path("results/vehicle_field.csv"))
    args = ap.parse_args()

    veh, params = VehicleParams(), CrowdParams()
    xs = np.arange(-10.0, 20.0 + 1e-9, args.step)
    ys = np.arange(-8.0, 8.0 + 1e-9, args.step)
    X, Y = np.meshgrid(xs, ys)
    pos = np.stack([X.ravel(), Y.ravel()], axis=1)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("speed", "x", "y", "fx", "fy", "magnitude"))
        for v in args.speeds:
            car = VehicleFootprint((0.0, 0.0), (1.0, 0.0), veh.length, veh.width, v)
            f = vehicle_field(pos, car, params)
            mag = np.hypot(f[:, 0], f[:, 1])
            for p, fv, m in zip(pos, f, mag):
                w.writerow((v, p[0], p[1], f"{fv[0]:.6g}", f"{fv[1]:.6g}", f"{m:.6g}"))
            ahead = mag[(np.abs(pos[:, 1]) < 1e-9) & (pos[:, 0] > 2.5)]
            area = (mag > 50.0).sum() * args.step ** 2
            print(f"v = {v:4.1f} m/s: area with |f_v| > 50 N = {area:6.1f} m^2, "
                  f"max ahead on the axis = {ahead.max():.0f} N")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
