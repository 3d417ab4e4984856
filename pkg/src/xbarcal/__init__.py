"""Behavioral simulator of a 1T1R OxRAM crossbar with three-stage body-bias offset calibration."""

from .autocal import CalResult, SweepRecord, calibrate_row, find_zero_crossing, sweep_stage
from .caldac import CalCode, LadderSpec, dac_output, dac_step_sizes, dac_table
from .config import ExperimentConfig, load_config
from .crossbar import Crossbar, CrossbarParams, MeasurementResult, RowDriverState, new_crossbar
from .devices import (
    BodyBiasModel,
    CellState,
    Operation,
    OxRamCell,
    PulseSpec,
    SelectorModel,
    apply_pulse,
    cell_path_conductance,
    offset_correction,
    read_current,
)
from .errors import ConfigError, DeviceStateError, ModelValidityError, ProtocolError
from .protocol import (
    ControlFrame,
    OpSelect,
    RowControlWord,
    ShiftRegister,
    decode_frame,
    decode_opselect,
    encode_frame,
    shift_register_step,
)

__version__ = "0.1.0"
