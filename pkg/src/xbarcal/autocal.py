"""Automatic three-stage zero-crossing calibration of one row buffer.

The controller sweeps the coarse field, locates the sign change of the
averaged offset, then sweeps the fine field inside the bracketing coarse
segment and finally the finer field inside the bracketing fine segment,
keeping the code with the smallest measured offset.

Crossings near segment edges are handled by sweeping the neighbouring
segment when the first one shows no sign change. Indices across two
adjacent sweeps are contiguous in the packed-code order, so the two
sweeps are searched as one sequence. When stage 1 shows no sign change
the controller descends into the end segment nearest zero, since the
crossing may still sit in the half segment beyond the outermost
stage-1 point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .caldac import TAPS, CalCode, dac_output
from .crossbar import Crossbar, MeasurementResult

IDLE_FIELD = 8  # unswept lower fields sit at the segment midpoint
DEFAULT_N_SAMPLES = 10**6


@dataclass
class SweepRecord:
    stage: int
    fixed: tuple[int, ...]
    points: list[tuple[int, MeasurementResult]] = field(default_factory=list)

    def code(self, value: int) -> CalCode:
        return sweep_code(self.stage, self.fixed, value)

    @property
    def means(self) -> list[float]:
        return [m.mean for _, m in self.points]

    def to_dict(self, ladder=None) -> dict:
        rows = []
        for value, m in self.points:
            row = {
                "code": value,
                "mean_offset_volts": m.mean,
                "stderr_volts": m.stderr,
                "n_samples": m.n_samples,
                "seed": m.seed,
            }
            if ladder is not None:
                row["v_cal_volts"] = dac_output(self.code(value), ladder)
            rows.append(row)
        return {"stage": self.stage, "fixed": list(self.fixed), "points": rows}


@dataclass
class CalResult:
    best_code: CalCode
    residual: float
    bracketed: bool
    sweeps: list[SweepRecord]
    measurement: MeasurementResult

    @property
    def residual_stderr(self) -> float:
        return self.measurement.stderr

    def to_dict(self, ladder=None) -> dict:
        return {
            "best_code": dict(zip(("coarse", "fine", "finer"), self.best_code.as_tuple())),
            "best_code_packed": self.best_code.packed,
            "residual_volts": self.residual,
            "residual_stderr_volts": self.residual_stderr,
            "bracketed": self.bracketed,
            "sweeps": [s.to_dict(ladder) for s in self.sweeps],
        }


def sweep_code(stage: int, fixed: Sequence[int], value: int) -> CalCode:
    """Code for swept ``value`` at ``stage`` with higher fields ``fixed``."""
    if stage not in (1, 2, 3):
        raise ValueError(f"stage must be 1, 2 or 3, got {stage}")
    if len(fixed) != stage - 1:
        raise ValueError(f"stage {stage} needs {stage - 1} fixed field(s), got {len(fixed)}")
    return CalCode(*fixed, value, *([IDLE_FIELD] * (3 - stage)))


def sweep_stage(
    xbar: Crossbar,
    row: int,
    stage: int,
    fixed_prefix: Sequence[int] = (),
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
    noise_sigma: float | None = None,
    exact: bool = False,
) -> SweepRecord:
    """Measure the averaged row offset at all 16 values of one field.

    The driver's calibration code is restored afterwards.
    """
    xbar._check_row(row)
    fixed = tuple(int(v) for v in fixed_prefix)
    codes = [sweep_code(stage, fixed, k) for k in range(TAPS)]
    point_seeds = np.random.default_rng(seed).integers(2**63, size=TAPS)
    record = SweepRecord(stage, fixed)
    saved = xbar.drivers[row].cal_code
    try:
        for k, (code, s) in enumerate(zip(codes, point_seeds)):
            xbar.set_cal_code(row, code)
            m = xbar.measure_row_offset(row, n_samples, noise_sigma=noise_sigma, seed=int(s), exact=exact)
            record.points.append((k, m))
    finally:
        xbar.set_cal_code(row, saved)
    return record


def _crossing(means: Sequence[float]) -> tuple[int, int] | None:
    for k, m in enumerate(means):
        if m == 0:
            return (k, k)
        if k + 1 < len(means) and (m < 0 < means[k + 1] or m > 0 > means[k + 1]):
            return (k, k + 1)
    return None


def find_zero_crossing(record: SweepRecord | Sequence[float]) -> tuple[int, int] | None:
    """First adjacent pair of opposite sign, ``(k, k)`` for an exact zero, else None.

    Returned indices are positions in the sweep, which equal the swept
    code values for a complete record.
    """
    means = record.means if isinstance(record, SweepRecord) else list(record)
    return _crossing(means)


def calibrate_row(
    xbar: Crossbar,
    row: int,
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
    noise_sigma: float | None = None,
    exact: bool = False,
) -> CalResult:
    """Run the coarse/fine/finer search on ``row`` and leave the best code loaded."""
    xbar._check_row(row)
    seeds = iter(np.random.default_rng(seed).integers(2**63, size=8).tolist())
    sweeps: list[SweepRecord] = []

    def run(stage, prefix):
        rec = sweep_stage(xbar, row, stage, prefix, n_samples, next(seeds), noise_sigma, exact)
        sweeps.append(rec)
        return rec

    # stage 1: coarse
    s1 = run(1, ())
    bracket = find_zero_crossing(s1)
    crossed = bracket is not None
    means = s1.means
    edge = 0 if abs(means[0]) <= abs(means[-1]) else TAPS - 1
    if bracket is None:
        coarse_candidates = [edge]
    else:
        coarse_candidates = sorted(set(bracket))

    # stage 2: fine, indexed by j = 16*coarse + fine
    j_points: list[tuple[int, float]] = []
    bracket = None
    for c in coarse_candidates:
        rec = run(2, (c,))
        j_points += [(TAPS * c + f, m.mean) for f, m in rec.points]
        bracket = _crossing([m for _, m in j_points])
        if bracket is not None:
            break
    if bracket is None:
        fine_candidates = [min(j_points, key=lambda p: (abs(p[1]), p[0]))[0]]
    else:
        crossed = True
        fine_candidates = sorted({j_points[i][0] for i in bracket})

    # stage 3: finer, indexed by the packed 12-bit word
    p_points: list[tuple[int, MeasurementResult]] = []
    for j in fine_candidates:
        rec = run(3, divmod(j, TAPS))
        p_points += [(TAPS * j + k, m) for k, m in rec.points]
        if _crossing([m.mean for _, m in p_points]) is not None:
            crossed = True
            break

    if crossed:
        word, best = min(p_points, key=lambda p: (abs(p[1].mean), p[0]))
    else:
        # out of range: clamp to the end of the DAC nearest zero
        word = 0 if edge == 0 else TAPS**3 - 1
        measured = dict(p_points)
        if word in measured:
            best = measured[word]
        else:
            xbar.set_cal_code(row, CalCode.unpack(word))
            best = xbar.measure_row_offset(row, n_samples, noise_sigma=noise_sigma, seed=next(seeds), exact=exact)
    best_code = CalCode.unpack(word)
    xbar.set_cal_code(row, best_code)
    return CalResult(best_code, best.mean, crossed, sweeps, best)
