"""Residual offset after calibration versus samples averaged per point.

With 200 uV per-sample noise, the finest DAC step (about 1.8 uV at the
input) only becomes resolvable once the standard error drops well below
it. Prints the residual distribution for each averaging depth.

Usage:
    python scripts/averaging_study.py [--trials 500] [--workers 4]
"""

import argparse

from xbarcal.crossbar import CrossbarParams
from xbarcal.experiments import run_montecarlo

DEPTHS = [10**2, 10**3, 10**4, 10**5, 10**6, 10**7, 10**8]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = CrossbarParams(sigma_os=1e-3, noise_sigma=200e-6, offset_limit=0.9 * 0.25 * 0.015)
    print(f"{'n_samples':>10} {'p50 uV':>9} {'p99 uV':>9} {'max uV':>9} {'<0.1 mV':>8}")
    for n in DEPTHS:
        s = run_montecarlo(params, args.trials, seed=args.seed, n_samples=n, workers=args.workers)["summary"]
        print(
            f"{n:>10.0e} {s['p50_volts'] * 1e6:9.3f} {s['p99_volts'] * 1e6:9.3f} "
            f"{s['max_volts'] * 1e6:9.3f} {s['fraction_below_0p1mV']:8.3f}"
        )


if __name__ == "__main__":
    main()
