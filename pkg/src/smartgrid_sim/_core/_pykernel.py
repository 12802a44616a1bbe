"""Pure-Python tick loop built from the public module functions.

This is the reference path: it composes ``controller_tick``, ``phase_advance``,
``try_lock``, ``dispatch`` and ``accumulate`` exactly as documented. The
compiled loop in ``_ckernel.pyx`` must reproduce its output bit for bit.
"""

from __future__ import annotations

from dataclasses import replace

from ..ems import EmsState, controller_tick, pack_events
from ..errors import ContractViolation, InternalInvariantError
from ..gridsync import SyncState, phase_advance, try_lock, wrap_phase
from ..metering import Direction, MeterState, accumulate
from ..plant import BatteryState, battery_voltage, dispatch, pv_power
from ..scenario import Tariff
from . import layout as L


def run_ticks(load, irr, freq, tariff, plant, engine, fcols, icols, final):
    n = len(load)
    dt = engine.dt_s
    q = engine.meter_wh_per_pulse
    slew = engine.sync_slew_rad_per_s
    battery = BatteryState(plant.initial_soc_wh)
    ems = EmsState()
    sync = SyncState(0.0, wrap_phase(-engine.initial_phase_offset_rad), float(freq[0]) if n else 0.0)
    meter = MeterState()
    load = load.tolist()
    irr = irr.tolist()
    freq = freq.tolist()
    tariffs = [Tariff(x) for x in tariff.tolist()]

    for k in range(n):
        t = k * dt
        tar = tariffs[k]
        try:
            pv = pv_power(irr[k], plant)
            v = battery_voltage(battery, plant)
            ems, mode, events = controller_tick(ems, tar, v, pv, load[k], plant, engine, t)
            sync = phase_advance(replace(sync, grid_freq_hz=freq[k]), dt, plant, slew)
            sync, sync_events = try_lock(sync, engine, plant, t)
            flows, new_battery = dispatch(load[k], pv, mode, sync.locked, battery, plant, engine, dt)
            meter, _, _ = accumulate(meter, flows.grid_import_w, flows.export_w, tar, dt, q)
        except ContractViolation as exc:
            raise InternalInvariantError(k, str(exc)) from exc

        fcols[L.F_SOC, k] = battery.soc_wh
        fcols[L.F_VBATT, k] = v
        fcols[L.F_PV, k] = flows.pv_w
        fcols[L.F_GRID, k] = flows.grid_import_w
        fcols[L.F_INV_AC, k] = flows.inv_ac_w
        fcols[L.F_INV_DC, k] = flows.inv_dc_w
        fcols[L.F_EXPORT, k] = flows.export_w
        fcols[L.F_CURTAIL, k] = flows.curtail_w
        fcols[L.F_CHARGE, k] = flows.batt_charge_w
        fcols[L.F_DISCHARGE, k] = flows.batt_discharge_w
        fcols[L.F_SERVED, k] = flows.served_load_w
        icols[L.I_MODE, k] = mode
        icols[L.I_LOCKED, k] = sync.locked
        icols[L.I_LOCKOUT, k] = sync.lockout
        icols[L.I_IMP_PULSES, k] = meter.import_pulses
        icols[L.I_EXP_PULSES, k] = meter.export_pulses
        icols[L.I_EVENTS, k] = pack_events(events) | pack_events(sync_events)
        battery = new_battery

    final[L.S_SOC] = battery.soc_wh
    final[L.S_IMP_OFFPEAK] = meter.ledger[(Direction.Import, Tariff.OffPeak)]
    final[L.S_IMP_PEAK] = meter.ledger[(Direction.Import, Tariff.Peak)]
    final[L.S_EXP_OFFPEAK] = meter.ledger[(Direction.Export, Tariff.OffPeak)]
    final[L.S_EXP_PEAK] = meter.ledger[(Direction.Export, Tariff.Peak)]
    final[L.S_IMP_RESIDUAL] = meter.import_residual_wh
    final[L.S_EXP_RESIDUAL] = meter.export_residual_wh
    final[L.S_GRID_PHASE] = sync.grid_phase_rad
    final[L.S_INV_PHASE] = sync.inv_phase_rad
