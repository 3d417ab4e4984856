import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xbarcal.caldac import CalCode, dac_output, dac_step_sizes, dac_table
from xbarcal.crossbar import Crossbar, CrossbarParams, MeasurementResult, RowDriverState, new_crossbar
from xbarcal.devices import BodyBiasModel, CellState, Operation
from xbarcal.errors import DeviceStateError, ModelValidityError

QUIET = CrossbarParams(sigma_os=0.0, noise_sigma=0.0, r_on=0.0, g_off=0.0)


def formed(rows=4, cols=4, params=QUIET, seed=0):
    x = Crossbar(rows, cols, params, seed)
    x.form_all()
    return x


def test_determinism():
    a, b = new_crossbar(4, 4, None, seed=1), new_crossbar(4, 4, None, seed=1)
    assert [d.v_os_random for d in a.drivers] == [d.v_os_random for d in b.drivers]
    assert a.measure_row_offset(2, 10**6) == b.measure_row_offset(2, 10**6)
    c = new_crossbar(4, 4, None, seed=2)
    assert [d.v_os_random for d in a.drivers] != [d.v_os_random for d in c.drivers]


def test_zero_sigma_offsets():
    x = new_crossbar(4, 4, CrossbarParams(sigma_os=0.0), seed=5)
    assert all(d.v_os_random == 0.0 for d in x.drivers)


def test_single_cell_and_initial_state():
    x = new_crossbar(1, 1, None, seed=0)
    assert x.cells[0][0].state is CellState.PRISTINE
    assert x.drivers[0].cal_code == CalCode(8, 0, 0)
    assert x.v_cal(0) == 4.5


@pytest.mark.parametrize("dims", [(0, 4), (4, 0)])
def test_zero_dimension(dims):
    with pytest.raises(ValueError):
        new_crossbar(*dims)


def test_offset_statistics_and_truncation():
    x = Crossbar(20000, 1, CrossbarParams(sigma_os=1e-3), seed=3)
    v = np.array([d.v_os_random for d in x.drivers])
    assert abs(v.std() - 1e-3) < 3e-5
    lim = 0.9 * 0.25 * 0.015
    y = Crossbar(20000, 1, CrossbarParams(sigma_os=1e-3, offset_limit=lim), seed=3)
    w = np.array([d.v_os_random for d in y.drivers])
    assert np.abs(w).max() <= lim
    assert np.abs(v).max() > lim


def test_ipot_code_range():
    with pytest.raises(ValueError):
        RowDriverState(0.0, BodyBiasModel(), ipot_code=1 << 14)
    RowDriverState(0.0, BodyBiasModel(), ipot_code=(1 << 14) - 1)


def test_form_targets_one_cell():
    x = Crossbar(4, 4, QUIET, 0)
    assert x.target_cell_op(1, 1, Operation.FORM) is None
    for r in range(4):
        for c in range(4):
            expected = CellState.LRS if (r, c) == (1, 1) else CellState.PRISTINE
            assert x.cells[r][c].state is expected


def test_read_example():
    x = Crossbar(4, 4, QUIET, 0)
    x.target_cell_op(1, 1, "FORM")
    assert x.target_cell_op(1, 1, "READ") == pytest.approx(21.898e-6, abs=1e-9)
    assert x.target_cell_op(1, 1, "READ") == pytest.approx(0.3 / 13700, rel=1e-15)


def test_set_on_pristine_errors():
    x = Crossbar(2, 2, QUIET, 0)
    with pytest.raises(DeviceStateError):
        x.target_cell_op(0, 0, Operation.SET)
    x.target_cell_op(0, 0, Operation.FORM)
    with pytest.raises(DeviceStateError):
        x.target_cell_op(0, 0, Operation.FORM)


def test_bad_index():
    x = Crossbar(2, 2, QUIET, 0)
    with pytest.raises(IndexError):
        x.target_cell_op(2, 0, Operation.FORM)
    with pytest.raises(IndexError):
        x.column_current(5, 0.3, {0})
    with pytest.raises(IndexError):
        x.measure_row_offset(-1, 10)


def test_column_current_examples():
    x = formed()
    assert x.column_current(0, 0.3, {0}) == pytest.approx(21.898e-6, abs=1e-9)
    assert x.column_current(0, 0.3, set()) == 0.0
    single = x.column_current(0, 0.3, {0})
    assert x.column_current(0, 0.3, {0, 1, 2, 3}) == pytest.approx(4 * single, rel=1e-15)


def test_column_current_validity():
    with pytest.raises(ModelValidityError):
        formed().column_current(0, 1.2, {0})


def test_column_current_includes_offsets_and_leakage():
    p = CrossbarParams(sigma_os=2e-3, noise_sigma=0.0, r_on=36.3e3, g_off=1e-9)
    x = formed(4, 2, p, seed=9)
    x.target_cell_op(2, 1, Operation.RESET)
    oracle = 0.0
    for r in range(4):
        v_os = x.drivers[r].v_os_random
        if r in (0, 2):
            res = 13.7e3 if r == 0 else 845.9e3
            oracle += (0.3 + v_os) / (res + 36.3e3)
        else:
            oracle += v_os * 1e-9
    assert x.column_current(1, 0.3, {0, 2}) == pytest.approx(oracle, rel=1e-12)


@settings(max_examples=50)
@given(st.sets(st.integers(0, 5)), st.integers(0, 2**32))
def test_superposition_exact(selected, seed):
    p = CrossbarParams(sigma_os=1e-3, noise_sigma=0.0, g_off=0.0)
    x = formed(6, 2, p, seed)
    for r in range(0, 6, 2):
        x.target_cell_op(r, 0, Operation.RESET)
    total = x.column_current(0, 0.25, selected)
    parts = [x.column_current(0, 0.25, {r}) for r in selected]
    assert total == math.fsum(parts)


def test_superposition_with_leakage():
    # every single-row call repeats the unselected leakage of the others
    p = CrossbarParams(sigma_os=1e-3, noise_sigma=0.0, g_off=1e-9)
    x = formed(4, 1, p, seed=4)
    rows = {0, 1, 3}
    idle = x.column_current(0, 0.3, set())
    lhs = x.column_current(0, 0.3, rows) + (len(rows) - 1) * idle
    rhs = sum(x.column_current(0, 0.3, {r}) for r in rows)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_integrate_and_compare():
    x = Crossbar(1, 1, QUIET, 0)
    out = x.integrate_and_compare(0, 21.898e-6, 100e-9)
    assert out.v_int == pytest.approx(2.1898, rel=1e-12)
    assert out.bit and not out.saturated
    assert x.integrate_and_compare(0, 0.0, 1e-7)[:2] == (0.0, False)
    at = Crossbar(1, 1, CrossbarParams(comp_threshold=2.0), 0)
    assert at.integrate_and_compare(0, 2e-5, 1e-7).bit is False  # 2e-5 * 1e-7 / 1e-12 == 2.0
    with pytest.raises(ValueError):
        x.integrate_and_compare(0, 1e-6, 0.0)


def test_integrator_clamps_at_rail():
    x = Crossbar(1, 1, QUIET, 0)
    out = x.integrate_and_compare(0, 1e-4, 1e-7)
    assert out == (5.0, True, True)
    neg = x.integrate_and_compare(0, -1e-4, 1e-7)
    assert neg == (-5.0, False, True)


def test_measure_examples():
    x = Crossbar(1, 1, QUIET, 0)
    x.drivers[0].v_os_random = 2e-3
    assert x.measure_row_offset(0, 1000).mean == 2e-3
    # -8 mV is off the DAC grid, so move Calibref 8 mV above a real tap instead
    y = Crossbar(1, 1, CrossbarParams(sigma_os=0.0, noise_sigma=0.0, v_calibref=4.508), 0)
    y.drivers[0].v_os_random = 2e-3
    assert y.v_cal(0) - 4.508 == pytest.approx(-8e-3, abs=1e-15)
    assert y.measure_row_offset(0, 1000).mean == pytest.approx(0.0, abs=1e-15)


def test_stderr_at_hundred_million():
    x = Crossbar(1, 1, CrossbarParams(), 0)
    m = x.measure_row_offset(0, 10**8, noise_sigma=200e-6)
    assert m.stderr == pytest.approx(20e-9, rel=1e-12)
    assert abs(m.mean - x.v_os_eff(0)) < 6 * m.stderr


def test_measurement_result_validation():
    with pytest.raises(ValueError):
        MeasurementResult(0.0, 1.0, 0, 1)
    with pytest.raises(ValueError):
        Crossbar(1, 1).measure_row_offset(0, 0)
    with pytest.raises(ValueError):
        Crossbar(1, 1).measure_row_offset(0, 5, noise_sigma=-1.0)


def test_explicit_seed_is_recorded_and_reproducible():
    x = Crossbar(1, 1, CrossbarParams(), 0)
    a = x.measure_row_offset(0, 500, seed=123)
    b = x.measure_row_offset(0, 500, seed=123)
    assert a == b and a.seed == 123


def test_exact_sampling_large_n_is_chunked():
    x = Crossbar(1, 1, CrossbarParams(sigma_os=0.0), 0)
    m = x.measure_row_offset(0, 3 * 2**20 + 7, seed=1, exact=True)
    assert abs(m.mean) < 6 * m.stderr


@pytest.mark.parametrize("row", [0, 1])
def test_noiseless_transfer_exhaustive(row):
    p = CrossbarParams(sigma_os=1e-3, noise_sigma=0.0)
    x = Crossbar(2, 1, p, seed=17)
    v_os = x.drivers[row].v_os_random
    table = dac_table(x.ladder)
    d3 = dac_step_sizes(x.ladder)[2]
    means = []
    for word in range(4096):
        x.set_cal_code(row, CalCode.unpack(word))
        mean = x.measure_row_offset(row, 1).mean
        assert mean == v_os + 0.25 * (table[word] - 4.5)
        means.append(mean)
    slope = np.diff(means)
    assert np.max(np.abs(slope - 0.25 * d3)) < 1e-15


def test_read_power_examples():
    x = Crossbar(4, 4, CrossbarParams(), 0)
    x.form_all()
    everything = [(r, c) for r in range(4) for c in range(4)]
    assert x.read_power(everything, 0.05) == pytest.approx(0.8e-6, rel=1e-12)
    assert x.read_power([], 0.05) == 0.0
    y = formed(1, 1)
    assert y.read_power([(0, 0)], 0.05) == pytest.approx(182.5e-9, rel=1e-3)
    assert y.read_power([(0, 0)], 0.05) == pytest.approx(0.05**2 / 13700, rel=1e-15)


def test_read_power_additive():
    x = Crossbar(3, 3, CrossbarParams(), 1)
    x.form_all()
    x.target_cell_op(1, 2, Operation.RESET)
    cells = [(r, c) for r in range(3) for c in range(3)]
    assert x.read_power(cells, 0.1) == math.fsum(x.read_power([rc], 0.1) for rc in cells)


def test_read_power_pristine_errors():
    x = Crossbar(2, 2, CrossbarParams(), 0)
    with pytest.raises(DeviceStateError):
        x.read_power([(0, 0)], 0.05)
