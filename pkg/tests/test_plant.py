import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from smartgrid_sim import ContractViolation, EngineParams, PlantParams
from smartgrid_sim.ems import EmsMode
from smartgrid_sim.plant import (BatteryState, PowerFlows, battery_step, battery_voltage, dispatch,
                                 inverter_convert, pv_power)

P = PlantParams()
E = EngineParams()


@pytest.mark.parametrize("irr, watts", [(0.0, 0.0), (1.0, 100.0), (0.37, 37.0)])
def test_pv_power(irr, watts):
    assert pv_power(irr, P) == pytest.approx(watts, abs=1e-12)


def test_battery_voltage_endpoints_and_midpoint():
    assert battery_voltage(BatteryState(0), P) == 11.0
    assert battery_voltage(BatteryState(84), P) == 13.0
    # independent evaluation of the same linear map
    expected = np.interp(42.0, [0.0, 84.0], [11.0, 13.0])
    assert expected == pytest.approx(12.0)
    assert battery_voltage(BatteryState(42), P) == pytest.approx(expected, abs=1e-12)


def test_battery_step_examples():
    s, d = battery_step(BatteryState(42), 36, 0, 100, P)
    assert s.soc_wh == pytest.approx(43.0) and d == 0
    s, _ = battery_step(BatteryState(84), 50, 0, 10, P)
    assert s.soc_wh == 84.0
    s, d = battery_step(BatteryState(0.05), 0, 36, 10, P)
    # 0.05 Wh over 10 s
    assert s.soc_wh == 0.0
    assert d == pytest.approx(0.05 * 3600 / 10) and d == pytest.approx(18.0)


@pytest.mark.parametrize("charge, discharge", [(10, 10), (-1, 0), (0, -1), (60, 0), (0, 300)])
def test_battery_step_contract(charge, discharge):
    with pytest.raises(ContractViolation):
        battery_step(BatteryState(40), charge, discharge, 1, P)


@pytest.mark.parametrize("dc, ac", [(0, 0), (100, 90), (300, 200)])
def test_inverter_convert(dc, ac):
    assert inverter_convert(dc, P) == pytest.approx(ac)


def test_dispatch_grid_only():
    f, s = dispatch(150, 0, EmsMode.GridSupply, False, BatteryState(42), P, E, 1)
    assert f == PowerFlows(grid_import_w=150, served_load_w=150)
    assert s.soc_wh == 42


def test_dispatch_inverter_from_battery():
    f, s = dispatch(90, 0, EmsMode.InverterLocal, False, BatteryState(42), P, E, 1)
    assert f.inv_ac_w == pytest.approx(90)
    assert f.inv_dc_w == pytest.approx(100)
    assert f.batt_discharge_w == pytest.approx(100)
    assert f.grid_import_w == pytest.approx(0, abs=1e-12)
    # DC: 0 + 100 == 100 + 0 + 0 ; AC: 0 + 90 == 90 + 0
    assert f.dc_residual() == pytest.approx(0, abs=1e-12)
    assert f.ac_residual() == pytest.approx(0, abs=1e-12)
    assert s.soc_wh == pytest.approx(42 - 100 / 3600)


def test_dispatch_export_with_full_battery():
    f, s = dispatch(0, 80, EmsMode.GridTieExport, True, BatteryState(84), P, E, 1)
    assert f.batt_charge_w == 0
    assert f.inv_dc_w == pytest.approx(80)
    assert f.export_w == pytest.approx(72)
    assert f.curtail_w == pytest.approx(0)
    assert s.soc_wh == 84


def test_dispatch_export_needs_lock():
    f, _ = dispatch(0, 80, EmsMode.GridTieExport, False, BatteryState(84), P, E, 1)
    assert f.export_w == 0 and f.curtail_w == pytest.approx(80)


def test_dispatch_inverter_capped_grid_tops_up():
    f, _ = dispatch(260, 0, EmsMode.InverterLocal, False, BatteryState(84), P, E, 1)
    assert f.inv_ac_w == pytest.approx(200)
    assert f.grid_import_w == pytest.approx(60)


def test_dispatch_empty_battery_falls_back_to_grid():
    f, s = dispatch(90, 0, EmsMode.InverterLocal, False, BatteryState(0.01), P, E, 1)
    assert f.batt_discharge_w == pytest.approx(36)
    assert f.inv_ac_w == pytest.approx(32.4)
    assert f.grid_import_w == pytest.approx(57.6)
    assert s.soc_wh == 0


def test_dispatch_shed_serves_nothing():
    f, s = dispatch(300, 30, EmsMode.Shed, False, BatteryState(42), P, E, 1)
    assert f.served_load_w == 0 and f.grid_import_w == 0 and f.inv_ac_w == 0
    assert f.batt_charge_w == 30 and f.curtail_w == 0
    assert s.soc_wh == pytest.approx(42 + 30 / 3600)


@pytest.mark.parametrize("mode", list(EmsMode))
@pytest.mark.parametrize("locked", [False, True])
def test_dispatch_zero_inputs_zero_flows(mode, locked):
    f, s = dispatch(0, 0, mode, locked, BatteryState(42), P, E, 1)
    assert f == PowerFlows()
    assert s.soc_wh == 42


# --- properties -------------------------------------------------------------

plants = st.builds(
    PlantParams,
    pv_rated_w=st.floats(1, 500),
    battery_capacity_wh=st.floats(0.5, 200),
    inverter_efficiency=st.floats(0.5, 1.0),
    inverter_max_ac_w=st.floats(10, 400),
    max_charge_w=st.floats(1, 200),
    max_discharge_w=st.floats(1, 400),
)


@given(
    plants,
    st.floats(0, 500), st.floats(0, 1), st.sampled_from(list(EmsMode)), st.booleans(),
    st.floats(0, 1), st.integers(1, 60),
)
def test_dispatch_balances_hold(plant, load, irr, mode, locked, frac, dt):
    state = BatteryState(frac * plant.battery_capacity_wh)
    pv = pv_power(irr, plant)
    f, new = dispatch(load, pv, mode, locked, state, plant, E, dt)
    assert abs(f.dc_residual()) <= 1e-9
    assert abs(f.ac_residual()) <= 1e-9
    assert abs(f.inv_ac_w - plant.inverter_efficiency * f.inv_dc_w) <= 1e-9
    assert f.batt_charge_w * f.batt_discharge_w == 0
    assert 0 <= new.soc_wh <= plant.battery_capacity_wh
    delta = new.soc_wh - state.soc_wh
    assert delta == pytest.approx((f.batt_charge_w - f.batt_discharge_w) * dt / 3600, abs=1e-9)
    if not (mode == EmsMode.GridTieExport and locked):
        assert f.export_w == 0
    if mode == EmsMode.Shed:
        assert f.served_load_w == 0 and f.grid_import_w == 0


@given(plants, st.floats(0, 1), st.floats(0, 1000), st.floats(0, 1000), st.integers(1, 3600))
def test_battery_step_stays_in_bounds(plant, frac, charge, discharge, dt):
    charge = min(charge, plant.max_charge_w)
    discharge = min(discharge, plant.max_discharge_w)
    assume(charge == 0 or discharge == 0)
    s, delivered = battery_step(BatteryState(frac * plant.battery_capacity_wh), charge, discharge, dt, plant)
    assert 0 <= s.soc_wh <= plant.battery_capacity_wh
    assert 0 <= delivered <= discharge + 1e-9


@given(plants, st.floats(0, 1), st.floats(0, 1))
def test_voltage_monotone(plant, a, b):
    lo, hi = sorted((a, b))
    cap = plant.battery_capacity_wh
    assert battery_voltage(BatteryState(lo * cap), plant) <= battery_voltage(BatteryState(hi * cap), plant)
