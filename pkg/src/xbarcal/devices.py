"""Behavioral models for the 1T1R OxRAM cell and the row buffer body bias.

The memristor is an ohmic two-state resistor after forming. The selector
MOSFET is an ideal switch with a fixed on-resistance and a small leakage
conductance when its gate is off. Programming pulses are classified into
FORM / SET / RESET / READ by threshold windows around the nominal
operating points of the fabricated device.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, replace

from .errors import DeviceStateError, LinearityWarning, ModelValidityError, SelectorLeakageWarning

R_LRS = 13.7e3
R_HRS = 845.9e3
R_ON = 36.3e3  # LRS path totals 50 kOhm
G_OFF = 1e-9
VDD = 4.8  # high rail after the 3.3 -> 4.8 V level shifters

READ_VALIDITY = 1.0  # ohmic model only trusted for |v| <= 1 V
LINEAR_BODY_RANGE = 0.5


class CellState(enum.Enum):
    PRISTINE = "PRISTINE"
    LRS = "LRS"
    HRS = "HRS"


class Operation(enum.Enum):
    FORM = "FORM"
    SET = "SET"
    RESET = "RESET"
    READ = "READ"


@dataclass(frozen=True)
class OxRamCell:
    state: CellState = CellState.PRISTINE
    r_lrs: float = R_LRS
    r_hrs: float = R_HRS

    def __post_init__(self):
        if not self.r_lrs > 0:
            raise ValueError(f"r_lrs must be positive, got {self.r_lrs}")
        if not self.r_hrs > self.r_lrs:
            raise ValueError(f"r_hrs ({self.r_hrs}) must exceed r_lrs ({self.r_lrs})")

    @property
    def resistance(self) -> float:
        """Memristor resistance; infinite while the filament is not formed."""
        if self.state is CellState.LRS:
            return self.r_lrs
        if self.state is CellState.HRS:
            return self.r_hrs
        return float("inf")


@dataclass(frozen=True)
class SelectorModel:
    r_on: float = R_ON
    g_off: float = G_OFF

    def __post_init__(self):
        if self.r_on < 0:
            raise ValueError(f"r_on must be >= 0, got {self.r_on}")
        if self.g_off < 0:
            raise ValueError(f"g_off must be >= 0, got {self.g_off}")

    def check_leakage(self, r_hrs: float = R_HRS, ratio: float = 0.01) -> bool:
        """Warn when off-leakage exceeds ``ratio`` of the HRS path conductance."""
        limit = ratio / (r_hrs + self.r_on)
        if self.g_off > limit:
            warnings.warn(
                f"g_off={self.g_off:g} S is not negligible against HRS path "
                f"conductance {1 / (r_hrs + self.r_on):g} S",
                SelectorLeakageWarning,
                stacklevel=2,
            )
            return False
        return True


@dataclass(frozen=True)
class PulseSpec:
    """A programming or read pulse across the 1T1R cell.

    ``v_ts`` is signed: positive means top electrode above source,
    negative is the source-to-top polarity used for RESET.
    """

    v_ts: float
    v_gate: float
    width: float
    compliance: float | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"pulse width must be positive, got {self.width}")
        if self.v_gate < 0:
            raise ValueError(f"gate voltage must be >= 0, got {self.v_gate}")
        if self.compliance is not None and self.compliance <= 0:
            raise ValueError(f"compliance must be positive, got {self.compliance}")


FORM_PULSE = PulseSpec(v_ts=4.0, v_gate=1.0, width=10e-6, compliance=1e-6)
SET_PULSE = PulseSpec(v_ts=2.4, v_gate=1.5, width=100e-9)
RESET_PULSE = PulseSpec(v_ts=-3.0, v_gate=VDD, width=100e-9)
READ_PULSE = PulseSpec(v_ts=0.3, v_gate=3.8, width=100e-9)

NOMINAL_PULSES = {
    Operation.FORM: FORM_PULSE,
    Operation.SET: SET_PULSE,
    Operation.RESET: RESET_PULSE,
    Operation.READ: READ_PULSE,
}

# (v_ts window, v_gate window, minimum width)
FORM_WINDOW = ((4.0, 5.0), (0.8, 1.2), 10e-6)
SET_WINDOW = ((2.4, 3.0), (1.3, 1.8), 0.0)
RESET_WINDOW = ((float("-inf"), -3.0), (3.0, float("inf")), 0.0)


def _inside(pulse: PulseSpec, window) -> bool:
    (v_lo, v_hi), (g_lo, g_hi), min_width = window
    return v_lo <= pulse.v_ts <= v_hi and g_lo <= pulse.v_gate <= g_hi and pulse.width >= min_width


def classify_pulse(pulse: PulseSpec) -> Operation | None:
    """Name the operation a pulse performs, or None if it switches nothing.

    Pulses with |v_ts| <= 1 V are reads. Anything else outside the three
    switching windows is treated as a disturb-free no-op.
    """
    if abs(pulse.v_ts) <= READ_VALIDITY:
        return Operation.READ
    if _inside(pulse, FORM_WINDOW):
        return Operation.FORM
    if _inside(pulse, SET_WINDOW):
        return Operation.SET
    if _inside(pulse, RESET_WINDOW):
        return Operation.RESET
    return None


def apply_pulse(cell: OxRamCell, pulse: PulseSpec) -> OxRamCell:
    """Return the cell after ``pulse``; the input cell is not modified."""
    op = classify_pulse(pulse)
    if op is None or op is Operation.READ:
        return cell
    if op is Operation.FORM:
        if cell.state is not CellState.PRISTINE:
            raise DeviceStateError(f"FORM on an already formed cell ({cell.state.value})")
        return replace(cell, state=CellState.LRS)
    if cell.state is CellState.PRISTINE:
        raise DeviceStateError(f"{op.value} on a PRISTINE cell; FORM it first")
    if op is Operation.SET:
        return replace(cell, state=CellState.LRS)
    return replace(cell, state=CellState.HRS)


def cell_path_conductance(cell: OxRamCell, selector: SelectorModel, gate_on: bool) -> float:
    if not gate_on or cell.state is CellState.PRISTINE:
        return selector.g_off
    return 1.0 / (cell.resistance + selector.r_on)


def read_current(cell: OxRamCell, selector: SelectorModel, v_read: float) -> float:
    """Ohmic read current through the cell with its selector gate on."""
    if abs(v_read) > READ_VALIDITY:
        raise ModelValidityError(f"|v_read|={abs(v_read)} V exceeds the {READ_VALIDITY} V ohmic range")
    return v_read * cell_path_conductance(cell, selector, gate_on=True)


@dataclass(frozen=True)
class BodyBiasModel:
    """Linearized body effect of the trimmed differential-pair transistor.

    ``eta`` is the ratio of body to gate transconductance seen at the
    input; the other transistor's body sits at ``v_calibref``.
    """

    eta: float = 0.25
    v_calibref: float = 4.5

    def __post_init__(self):
        if not abs(self.eta) < 1:
            raise ValueError(f"|eta| must be < 1, got {self.eta}")


def offset_correction(model: BodyBiasModel, v_cal: float) -> float:
    """Input-referred offset shift for a body voltage ``v_cal``."""
    dv = v_cal - model.v_calibref
    if abs(dv) > LINEAR_BODY_RANGE:
        warnings.warn(
            f"body bias {dv:+.3f} V from Calibref is outside the linear range",
            LinearityWarning,
            stacklevel=2,
        )
    return model.eta * dv
