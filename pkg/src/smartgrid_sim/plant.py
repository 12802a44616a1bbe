"""
Simplified PV / battery / inverter models and the per-tick DC-bus dispatch.

Sign conventions
----------------
Every flow in :class:`PowerFlows` is a non-negative magnitude in watts.
The two buses balance as::

    DC:  pv + batt_discharge == inv_dc + batt_charge + curtail
    AC:  grid_import + inv_ac == served_load + export

The battery charges from PV only. Charge efficiency is unity and there is no
self-discharge.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ems import EmsMode
from .errors import ContractViolation
from .scenario import EngineParams, PlantParams

BALANCE_TOL_W = 1e-9


@dataclass(frozen=True, slots=True)
class BatteryState:
    soc_wh: float


@dataclass(frozen=True, slots=True)
class PowerFlows:
    pv_w: float = 0.0
    grid_import_w: float = 0.0
    inv_ac_w: float = 0.0
    inv_dc_w: float = 0.0
    batt_charge_w: float = 0.0
    batt_discharge_w: float = 0.0
    export_w: float = 0.0
    curtail_w: float = 0.0
    served_load_w: float = 0.0

    def dc_residual(self) -> float:
        return self.pv_w + self.batt_discharge_w - (self.inv_dc_w + self.batt_charge_w + self.curtail_w)

    def ac_residual(self) -> float:
        return self.grid_import_w + self.inv_ac_w - (self.served_load_w + self.export_w)


def pv_power(irradiance: float, params: PlantParams) -> float:
    return irradiance * params.pv_rated_w


def battery_voltage(state: BatteryState, params: PlantParams) -> float:
    """Terminal voltage, linear in state of charge between the empty and full voltages."""
    frac = state.soc_wh / params.battery_capacity_wh
    return params.battery_v_empty + (params.battery_v_full - params.battery_v_empty) * frac


def battery_step(
    state: BatteryState,
    charge_w: float,
    discharge_w: float,
    dt_s: float,
    params: PlantParams,
) -> tuple[BatteryState, float]:
    """Advance the battery by one tick.

    Returns the new state and the discharge power actually delivered, which is
    less than ``discharge_w`` when the stored energy runs out mid-tick.
    """
    if charge_w < 0 or discharge_w < 0:
        raise ContractViolation("charge and discharge powers must be non-negative")
    if charge_w > 0 and discharge_w > 0:
        raise ContractViolation("battery cannot charge and discharge in the same tick")
    if charge_w > params.max_charge_w or discharge_w > params.max_discharge_w:
        raise ContractViolation("battery power exceeds its rated limit")
    if discharge_w > 0:
        need_wh = discharge_w * dt_s / 3600.0
        if need_wh >= state.soc_wh:
            return BatteryState(0.0), state.soc_wh * 3600.0 / dt_s
        return BatteryState(state.soc_wh - need_wh), discharge_w
    soc = state.soc_wh + charge_w * dt_s / 3600.0
    if soc > params.battery_capacity_wh:
        soc = params.battery_capacity_wh
    return BatteryState(soc), 0.0


def inverter_convert(dc_w: float, params: PlantParams) -> float:
    ac = params.inverter_efficiency * dc_w
    return ac if ac <= params.inverter_max_ac_w else params.inverter_max_ac_w


def charge_headroom_w(state: BatteryState, dt_s: float, params: PlantParams) -> float:
    """Largest charge power the battery can absorb this tick."""
    room = (params.battery_capacity_wh - state.soc_wh) * 3600.0 / dt_s
    return room if room <= params.max_charge_w else params.max_charge_w


def dispatch(
    load_w: float,
    pv_w: float,
    mode: EmsMode,
    sync_locked: bool,
    state: BatteryState,
    params: PlantParams,
    engine: EngineParams,
    dt_s: float,
) -> tuple[PowerFlows, BatteryState]:
    """Split this tick's load and PV across grid, inverter, battery and curtailment.

    PV goes first to the inverter's demand, then to battery charging, then
    (grid-tie export only, when synchronised) to export, and the rest is
    curtailed. The battery discharges only to cover an inverter shortfall,
    and the grid tops up whatever the inverter could not deliver.
    """
    eta = params.inverter_efficiency
    cap = charge_headroom_w(state, dt_s, params)
    grid = 0.0
    inv_dc = 0.0
    inv_ac = 0.0
    export = 0.0
    discharge = 0.0

    if mode == EmsMode.GridSupply or mode == EmsMode.Shed:
        served = load_w if mode == EmsMode.GridSupply else 0.0
        grid = served
        charge = pv_w if pv_w <= cap else cap
        curtail = pv_w - charge
        new_state, _ = battery_step(state, charge, 0.0, dt_s, params)
    else:
        served = load_w
        target_ac = load_w if load_w <= params.inverter_max_ac_w else params.inverter_max_ac_w
        target_dc = target_ac / eta
        pv_used = pv_w if pv_w <= target_dc else target_dc
        shortfall = target_dc - pv_used
        surplus = pv_w - pv_used
        if shortfall > 0:
            request = shortfall if shortfall <= params.max_discharge_w else params.max_discharge_w
            new_state, discharge = battery_step(state, 0.0, request, dt_s, params)
            charge = 0.0
        else:
            charge = surplus if surplus <= cap else cap
            new_state, _ = battery_step(state, charge, 0.0, dt_s, params)
        surplus -= charge
        export_dc = 0.0
        if mode == EmsMode.GridTieExport and sync_locked and surplus > 0:
            local_ac = eta * (pv_used + discharge)
            room_dc = (params.inverter_max_ac_w - local_ac) / eta
            if room_dc > 0:
                export_dc = surplus if surplus <= room_dc else room_dc
        curtail = surplus - export_dc
        inv_dc = pv_used + discharge + export_dc
        inv_ac = inverter_convert(inv_dc, params)
        export = eta * export_dc
        local = inv_ac - export
        grid = load_w - local if load_w > local else 0.0

    flows = PowerFlows(
        pv_w=pv_w,
        grid_import_w=grid,
        inv_ac_w=inv_ac,
        inv_dc_w=inv_dc,
        batt_charge_w=charge,
        batt_discharge_w=discharge,
        export_w=export,
        curtail_w=curtail,
        served_load_w=served,
    )
    check_flows(flows, eta)
    return flows, new_state


def check_flows(flows: PowerFlows, eta: float) -> None:
    for name in PowerFlows.__slots__:
        if getattr(flows, name) < 0:
            raise ContractViolation(f"negative flow {name}={getattr(flows, name)!r}")
    if abs(flows.dc_residual()) > BALANCE_TOL_W:
        raise ContractViolation(f"DC bus imbalance {flows.dc_residual()!r} W")
    if abs(flows.ac_residual()) > BALANCE_TOL_W:
        raise ContractViolation(f"AC bus imbalance {flows.ac_residual()!r} W")
    if abs(flows.inv_ac_w - eta * flows.inv_dc_w) > BALANCE_TOL_W:
        raise ContractViolation("inverter output does not match efficiency")
    if flows.batt_charge_w > 0 and flows.batt_discharge_w > 0:
        raise ContractViolation("simultaneous charge and discharge")
