"""N x n 1T1R crossbar with offset-afflicted row buffers.

Each row has a pre-synaptic driver: a unity buffer whose input-referred
offset is a random mismatch term plus the body-bias correction set by
its calibration word. Each column ends in an ideal integrator and a
comparator. All randomness derives from the seed given at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .caldac import MIDSCALE, CalCode, LadderSpec, dac_output
from .devices import (
    G_OFF,
    NOMINAL_PULSES,
    R_HRS,
    R_LRS,
    R_ON,
    READ_VALIDITY,
    BodyBiasModel,
    CellState,
    OxRamCell,
    Operation,
    SelectorModel,
    apply_pulse,
    cell_path_conductance,
    offset_correction,
)
from .errors import DeviceStateError, ModelValidityError

IPOT_BITS = 14
# Above this sample count the mean of the noise may be drawn in one shot.
EXACT_SAMPLING_LIMIT = 10_000
_CHUNK = 1 << 20


@dataclass(frozen=True)
class CrossbarParams:
    r_lrs: float = R_LRS
    r_hrs: float = R_HRS
    r_on: float = R_ON
    g_off: float = G_OFF
    v_ref: float = 4.5
    v_d: float = 0.015
    v_calibref: float = 4.5
    eta: float = 0.25
    sigma_os: float = 1e-3
    noise_sigma: float = 200e-6
    integ_cap: float = 1e-12
    comp_threshold: float = 1.0
    v_rail: float = 5.0
    # Reject-and-redraw offsets whose magnitude exceeds this (V); None = untruncated.
    offset_limit: float | None = None

    def __post_init__(self):
        if self.sigma_os < 0 or self.noise_sigma < 0:
            raise ValueError("sigma_os and noise_sigma must be >= 0")
        if self.integ_cap <= 0:
            raise ValueError("integ_cap must be positive")
        if self.offset_limit is not None and self.offset_limit <= 0:
            raise ValueError("offset_limit must be positive")
        # component invariants are checked by building each model once
        _ = (self.ladder, self.body, self.selector, self.blank_cell)

    @property
    def ladder(self) -> LadderSpec:
        return LadderSpec(v_ref=self.v_ref, v_d=self.v_d)

    @property
    def body(self) -> BodyBiasModel:
        return BodyBiasModel(eta=self.eta, v_calibref=self.v_calibref)

    @property
    def selector(self) -> SelectorModel:
        return SelectorModel(r_on=self.r_on, g_off=self.g_off)

    @property
    def blank_cell(self) -> OxRamCell:
        return OxRamCell(CellState.PRISTINE, r_lrs=self.r_lrs, r_hrs=self.r_hrs)

    @property
    def correctable_range(self) -> float:
        """Largest offset magnitude the calibration DAC can cancel."""
        return abs(self.eta) * self.v_d


@dataclass
class RowDriverState:
    v_os_random: float
    body: BodyBiasModel
    cal_code: CalCode = field(default_factory=lambda: CalCode(*MIDSCALE))
    ipot_code: int = 0

    def __post_init__(self):
        if not 0 <= self.ipot_code < (1 << IPOT_BITS):
            raise ValueError(f"ipot_code {self.ipot_code} does not fit {IPOT_BITS} bits")

    def v_os_eff(self, ladder: LadderSpec) -> float:
        return self.v_os_random + offset_correction(self.body, dac_output(self.cal_code, ladder))


@dataclass(frozen=True)
class MeasurementResult:
    mean: float
    sigma_per_sample: float
    n_samples: int
    seed: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @property
    def stderr(self) -> float:
        return self.sigma_per_sample / math.sqrt(self.n_samples)


class IntegratorOutput(NamedTuple):
    v_int: float
    bit: bool
    saturated: bool


def _draw_offsets(rng: np.random.Generator, n: int, sigma: float, limit: float | None) -> np.ndarray:
    offsets = rng.normal(0.0, sigma, size=n)
    if limit is None or sigma == 0:
        return offsets
    bad = np.abs(offsets) > limit
    while bad.any():
        offsets[bad] = rng.normal(0.0, sigma, size=int(bad.sum()))
        bad = np.abs(offsets) > limit
    return offsets


def noise_mean(rng: np.random.Generator, n_samples: int, sigma: float, closed_form: bool = False) -> float:
    """Mean of ``n_samples`` i.i.d. N(0, sigma^2) draws.

    ``closed_form`` draws the mean itself from N(0, sigma^2/n); otherwise
    every sample is drawn, in bounded chunks.
    """
    if closed_form:
        return float(rng.normal(0.0, sigma / math.sqrt(n_samples)))
    total = 0.0
    left = n_samples
    while left:
        k = min(left, _CHUNK)
        total += float(rng.normal(0.0, sigma, size=k).sum())
        left -= k
    return total / n_samples


class Crossbar:
    """Mutable simulation state of one crossbar instance.

    Row and column indices are 0-based; row 0 is the chip's row 1.
    """

    def __init__(self, rows: int, cols: int, params: CrossbarParams | None = None, seed: int = 0):
        if rows < 1 or cols < 1:
            raise ValueError(f"crossbar dimensions must be >= 1, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.params = params or CrossbarParams()
        self.seed = seed
        self.ladder = self.params.ladder
        self.selector = self.params.selector
        blank = self.params.blank_cell
        self.cells = [[blank] * cols for _ in range(rows)]

        offset_seq, meas_seq = np.random.SeedSequence(seed).spawn(2)
        offsets = _draw_offsets(
            np.random.default_rng(offset_seq), rows, self.params.sigma_os, self.params.offset_limit
        )
        body = self.params.body
        self.drivers = [RowDriverState(float(v), body) for v in offsets]
        self._meas_rng = np.random.default_rng(meas_seq)

    def __repr__(self):
        return f"Crossbar({self.rows}x{self.cols}, seed={self.seed})"

    def _check_row(self, row: int):
        if not 0 <= row < self.rows:
            raise IndexError(f"row {row} outside 0..{self.rows - 1}")

    def _check_col(self, col: int):
        if not 0 <= col < self.cols:
            raise IndexError(f"column {col} outside 0..{self.cols - 1}")

    # row drivers

    def set_cal_code(self, row: int, code: CalCode):
        self._check_row(row)
        self.drivers[row].cal_code = code

    def v_cal(self, row: int) -> float:
        self._check_row(row)
        return dac_output(self.drivers[row].cal_code, self.ladder)

    def v_os_eff(self, row: int) -> float:
        self._check_row(row)
        return self.drivers[row].v_os_eff(self.ladder)

    # array operations

    def target_cell_op(self, row: int, col: int, op: Operation | str, v_read: float | None = None) -> float | None:
        """Apply the nominal pulse for ``op`` to one cell; READ returns the column current.

        Only the target cell's selector is on, so the other cells see no
        programming bias.
        """
        self._check_row(row)
        self._check_col(col)
        op = Operation(op)
        pulse = NOMINAL_PULSES[op]
        self.cells[row][col] = apply_pulse(self.cells[row][col], pulse)
        if op is Operation.READ:
            v = pulse.v_ts if v_read is None else v_read
            return self.column_current(col, v, {row})
        return None

    def column_current(self, col: int, v_read: float, selected_rows: Iterable[int] = ()) -> float:
        """Current into column ``col``.

        Selected rows drive ``v_read`` plus their offset through an on
        selector; the rest drive only their offset through ``g_off``.
        """
        self._check_col(col)
        if abs(v_read) > READ_VALIDITY:
            raise ModelValidityError(f"|v_read|={abs(v_read)} V exceeds the ohmic range")
        selected = set(selected_rows)
        for r in selected:
            self._check_row(r)
        terms = []
        for r in range(self.rows):
            v_os = self.drivers[r].v_os_eff(self.ladder)
            if r in selected:
                g = cell_path_conductance(self.cells[r][col], self.selector, gate_on=True)
                terms.append((v_read + v_os) * g)
            else:
                terms.append(v_os * self.selector.g_off)
        return math.fsum(terms)

    def integrate_and_compare(self, col: int, current: float, pulse_width: float) -> IntegratorOutput:
        self._check_col(col)
        if not pulse_width > 0:
            raise ValueError("pulse_width must be positive")
        v_int = current * pulse_width / self.params.integ_cap
        rail = self.params.v_rail
        saturated = abs(v_int) > rail
        if saturated:
            v_int = math.copysign(rail, v_int)
        return IntegratorOutput(v_int, v_int > self.params.comp_threshold, saturated)

    def measure_row_offset(
        self,
        row: int,
        n_samples: int,
        noise_sigma: float | None = None,
        seed: int | None = None,
        exact: bool = False,
    ) -> MeasurementResult:
        """Average ``n_samples`` noisy readings of the row's effective offset.

        Up to ``EXACT_SAMPLING_LIMIT`` samples (or with ``exact``) every
        sample is drawn; beyond that the sample mean is drawn directly from
        N(0, sigma^2/n), which has the same distribution.
        """
        self._check_row(row)
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        sigma = self.params.noise_sigma if noise_sigma is None else noise_sigma
        if sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if seed is None:
            seed = int(self._meas_rng.integers(2**63))
        mean = self.v_os_eff(row)
        if sigma > 0:
            closed_form = not exact and n_samples > EXACT_SAMPLING_LIMIT
            mean += noise_mean(np.random.default_rng(seed), n_samples, sigma, closed_form)
        return MeasurementResult(mean, sigma, n_samples, seed)

    def read_power_breakdown(self, selected_cells: Iterable[tuple[int, int]], v_read: float) -> dict[tuple[int, int], float]:
        if abs(v_read) > READ_VALIDITY:
            raise ModelValidityError(f"|v_read|={abs(v_read)} V exceeds the ohmic range")
        out = {}
        for r, c in selected_cells:
            self._check_row(r)
            self._check_col(c)
            cell = self.cells[r][c]
            if cell.state is CellState.PRISTINE:
                raise DeviceStateError(f"cell ({r}, {c}) is PRISTINE and cannot be read")
            out[(r, c)] = v_read**2 * cell_path_conductance(cell, self.selector, gate_on=True)
        return out

    def read_power(self, selected_cells: Iterable[tuple[int, int]], v_read: float) -> float:
        """Dissipation of a simultaneous read at nominal ``v_read`` (offsets ignored)."""
        return math.fsum(self.read_power_breakdown(selected_cells, v_read).values())

    def form_all(self):
        for r in range(self.rows):
            for c in range(self.cols):
                if self.cells[r][c].state is CellState.PRISTINE:
                    self.target_cell_op(r, c, Operation.FORM)


def new_crossbar(rows: int, cols: int, params: CrossbarParams | None = None, seed: int = 0) -> Crossbar:
    return Crossbar(rows, cols, params, seed)

