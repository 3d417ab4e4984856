"""Stage 1/2/3 calibration sweeps of one row, written as plot-ready CSVs.

Follows the calibration order of the measured chip: a coarse sweep, then
fine and finer sweeps zoomed onto the zero crossing of the previous one.

Usage:
    python scripts/reproduce_sweeps.py [--seed 1] [--row 0] [--outdir sweeps]
"""

import argparse
import csv
from pathlib import Path

from xbarcal import Crossbar, calibrate_row, dac_output
from xbarcal.config import ExperimentConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--row", type=int, default=0)
    ap.add_argument("--n-samples", type=int, default=10**8)
    ap.add_argument("--outdir", default="sweeps")
    args = ap.parse_args()

    cfg = ExperimentConfig(seed=args.seed, n_samples=args.n_samples)
    xbar = Crossbar(cfg.rows, cfg.cols, cfg.crossbar_params(), seed=cfg.seed)
    v_os = xbar.drivers[args.row].v_os_random
    res = calibrate_row(xbar, args.row, n_samples=cfg.n_samples, seed=cfg.seed)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for i, sweep in enumerate(res.sweeps):
        path = outdir / f"row{args.row}_sweep{i}_stage{sweep.stage}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["code", "v_cal_volts", "mean_offset_volts", "stderr_volts"])
            for value, m in sweep.points:
                w.writerow([value, repr(dac_output(sweep.code(value), xbar.ladder)), repr(m.mean), repr(m.stderr)])
        lo, hi = sweep.means[0], sweep.means[-1]
        print(f"{path}: stage {sweep.stage} prefix {sweep.fixed}, offset {lo * 1e3:+.4f} .. {hi * 1e3:+.4f} mV")

    print(f"random offset      {v_os * 1e3:+.4f} mV")
    print(f"best code          {res.best_code.as_tuple()} -> {dac_output(res.best_code, xbar.ladder):.9f} V")
    print(f"residual offset    {res.residual * 1e6:+.3f} uV (stderr {res.residual_stderr * 1e9:.1f} nV)")


if __name__ == "__main__":
    main()
