"""Three-stage cascaded resistor-ladder calibration DAC.

Each stage is a 16-tap ladder; the fine stage subdivides one coarse
segment and the finer stage one fine segment, so the 12-bit word
``coarse<<8 | fine<<4 | finer`` is a uniform 4096-level DAC over
[v_ref - v_d, v_ref + v_d). Code (8, 0, 0) sits exactly at v_ref.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

STAGE_BITS = 4
TAPS = 1 << STAGE_BITS
N_CODES = TAPS**3
MIDSCALE = (8, 0, 0)
FIELDS = ("coarse", "fine", "finer")


@dataclass(frozen=True, order=True)
class CalCode:
    coarse: int
    fine: int
    finer: int

    def __post_init__(self):
        for name in FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"{name} must be an int, got {value!r}")
            if not 0 <= value < TAPS:
                raise ValueError(f"{name}={value} does not fit {STAGE_BITS} bits")
            object.__setattr__(self, name, int(value))

    @property
    def packed(self) -> int:
        return (self.coarse << 8) | (self.fine << 4) | self.finer

    @classmethod
    def unpack(cls, word: int) -> "CalCode":
        if not 0 <= word < N_CODES:
            raise ValueError(f"calibration word {word} does not fit 12 bits")
        return cls((word >> 8) & 0xF, (word >> 4) & 0xF, word & 0xF)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.coarse, self.fine, self.finer)


@dataclass(frozen=True)
class LadderSpec:
    v_ref: float = 4.5
    v_d: float = 0.015
    taps_per_stage: int = TAPS

    def __post_init__(self):
        if self.taps_per_stage != TAPS:
            raise ValueError(f"only {TAPS}-tap stages are modeled, got {self.taps_per_stage}")
        if self.v_d < 0:
            raise ValueError(f"v_d must be >= 0, got {self.v_d}")


def dac_step_sizes(spec: LadderSpec) -> tuple[float, float, float]:
    """Coarse, fine and finer LSB sizes in volts."""
    span = 2 * spec.v_d
    return span / TAPS, span / TAPS**2, span / TAPS**3


@lru_cache(maxsize=64)
def _table(spec: LadderSpec) -> np.ndarray:
    # Exact rational evaluation, rounded once to float per code.
    lo = Fraction(spec.v_ref) - Fraction(spec.v_d)
    lsb = 2 * Fraction(spec.v_d) / N_CODES
    table = np.array([float(lo + lsb * k) for k in range(N_CODES)])
    table.setflags(write=False)
    return table


def dac_table(spec: LadderSpec) -> np.ndarray:
    """Output voltage for every packed code, indexed by the 12-bit word."""
    return _table(spec)


def dac_output(code: CalCode, spec: LadderSpec) -> float:
    """Ideal unloaded ladder output for ``code``.

    Equivalent to ``(v_ref - v_d) + d1*coarse + d2*fine + d3*finer`` with
    the sum carried out exactly and rounded once.
    """
    return float(_table(spec)[code.packed])
