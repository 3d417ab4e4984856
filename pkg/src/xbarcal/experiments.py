"""Monte Carlo calibration campaigns over independently seeded crossbars."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .autocal import calibrate_row
from .crossbar import Crossbar, CrossbarParams

RESIDUAL_TARGET = 1e-4


def _trial(args) -> tuple[float, bool]:
    params, rows, cols, row, seed, n_samples, exact = args
    xbar = Crossbar(rows, cols, params, seed=seed)
    res = calibrate_row(xbar, row, n_samples=n_samples, seed=seed, exact=exact)
    return res.residual, res.bracketed


def trial_seeds(seed: int, trials: int) -> list[int]:
    return [int(s) for s in np.random.default_rng(seed).integers(2**63, size=trials)]


def run_montecarlo(
    params: CrossbarParams,
    trials: int,
    seed: int = 0,
    n_samples: int = 10**6,
    rows: int = 1,
    cols: int = 1,
    row: int = 0,
    workers: int = 1,
    exact: bool = False,
) -> dict:
    """Calibrate one row on ``trials`` fresh crossbars and summarize |residual|.

    Results are ordered by trial index regardless of ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [(params, rows, cols, row, s, n_samples, exact) for s in trial_seeds(seed, trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        out = [_trial(j) for j in jobs]
    residuals = np.array([r for r, _ in out])
    mag = np.abs(residuals)
    return {
        "trials": trials,
        "residuals_volts": residuals.tolist(),
        "bracketed": [b for _, b in out],
        "summary": {
            "p50_volts": float(np.percentile(mag, 50)),
            "p99_volts": float(np.percentile(mag, 99)),
            "max_volts": float(mag.max()),
            "fraction_below_0p1mV": float(np.mean(mag < RESIDUAL_TARGET)),
        },
    }
