"""
Deterministic tick loop, trace records and run reports.

Per tick, in fixed order: sample the profiles and the tariff, read the battery
voltage, run the controller, advance and test the grid synchronisation,
dispatch power, meter the grid exchange. All sensor reads reflect the state at
the start of the tick and dispatched power applies over the whole tick.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

import numpy as np

from ._core import BACKEND, get_kernel
from ._core import layout as L
from .ems import EVENT_ORDER, EmsMode, unpack_events
from .metering import Bill, MeterState, accumulate, bill_from_kwh, compute_bill
from .scenario import SECONDS_PER_DAY, ProfilePoint, Scenario, TariffSchedule, Tariff, ToggleState

MONTH_S = 30 * SECONDS_PER_DAY


@dataclass(slots=True)
class TraceRecord:
    t: int
    tariff: str
    mode: str
    load_w: float
    pv_w: float
    soc_wh: float
    v_batt: float
    grid_import_w: float
    inv_ac_w: float
    export_w: float
    curtail_w: float
    grid_freq_hz: float
    locked: bool
    lockout: bool
    import_pulses_cum: int
    export_pulses_cum: int
    events: tuple[str, ...]


TRACE_FIELDS = tuple(f.name for f in fields(TraceRecord))
_FLOAT_FIELDS = {"load_w", "pv_w", "soc_wh", "v_batt", "grid_import_w", "inv_ac_w",
                 "export_w", "curtail_w", "grid_freq_hz"}
_INT_FIELDS = {"t", "import_pulses_cum", "export_pulses_cum"}
_BOOL_FIELDS = {"locked", "lockout"}

TOTAL_KEYS = ("grid_import", "grid_import_peak", "grid_import_offpeak", "export", "pv_generated",
              "served_load", "unserved_load", "inverter_ac", "inverter_dc", "curtailed",
              "battery_charge", "battery_discharge")


@dataclass
class RunReport:
    bill: Bill
    totals: dict  # kWh by category, keys as TOTAL_KEYS
    event_counts: dict  # event name -> count, every kind present
    peak_grid_import_w: float
    ticks: int
    monthly_bills: list  # one Bill per 30-day segment


@dataclass
class SimResult:
    """Column-oriented output of one run.

    ``col(name)`` returns a per-tick float column by flow name
    (``"grid_import_w"``, ``"batt_charge_w"``, ...). ``icols`` holds mode, lock
    flags, cumulative pulses and packed event masks (see ``_core.layout``).
    """

    scenario: Scenario
    t: np.ndarray
    load_w: np.ndarray
    grid_freq_hz: np.ndarray
    tariff: np.ndarray
    fcols: np.ndarray
    icols: np.ndarray
    final: np.ndarray
    backend: str

    def col(self, name: str) -> np.ndarray:
        return self.fcols[_FCOL[name]]

    @property
    def mode(self) -> np.ndarray:
        return self.icols[L.I_MODE]

    @property
    def events(self) -> np.ndarray:
        return self.icols[L.I_EVENTS]


_FCOL = {
    "soc_wh": L.F_SOC, "v_batt": L.F_VBATT, "pv_w": L.F_PV, "grid_import_w": L.F_GRID,
    "inv_ac_w": L.F_INV_AC, "inv_dc_w": L.F_INV_DC, "export_w": L.F_EXPORT, "curtail_w": L.F_CURTAIL,
    "batt_charge_w": L.F_CHARGE, "batt_discharge_w": L.F_DISCHARGE, "served_load_w": L.F_SERVED,
}


def sample_profile(profile: tuple[ProfilePoint, ...], ts: np.ndarray) -> np.ndarray:
    """Vectorised step-hold lookup, equivalent to ``profile_at`` at every ``ts``."""
    pt = np.array([p.t for p in profile], dtype=np.int64)
    vals = np.array([p.value for p in profile], dtype=np.float64)
    idx = np.searchsorted(pt, ts, side="right") - 1
    return vals[np.maximum(idx, 0)]


def sample_tariff(schedule: TariffSchedule, ts: np.ndarray) -> np.ndarray:
    """Vectorised ``tariff_at``; returns int8 codes of :class:`Tariff`."""
    tod = ts % SECONDS_PER_DAY
    peak = np.zeros(ts.shape, dtype=bool)
    for start, end in schedule.peak_windows:
        peak |= (tod >= start) & (tod < end)
    if schedule.toggle_events:
        toggle_t = np.array([t for t, _ in schedule.toggle_events], dtype=np.int64)
        # index -1 = before any toggle (auto)
        codes = np.array([0] + [{ToggleState.Auto: 0, ToggleState.Peak: 1, ToggleState.OffPeak: 2}[s]
                                for _, s in schedule.toggle_events])
        forced = codes[np.searchsorted(toggle_t, ts, side="right")]
        peak = np.where(forced == 1, True, np.where(forced == 2, False, peak))
    return peak.astype(np.int8)


def run(scenario: Scenario, backend: str | None = None) -> SimResult:
    """Run the tick loop and return raw columns (no record objects)."""
    eng = scenario.engine
    n = eng.n_ticks
    ts = np.arange(n, dtype=np.int64) * eng.dt_s
    load = sample_profile(scenario.load_profile, ts)
    irr = sample_profile(scenario.irradiance_profile, ts)
    freq = sample_profile(scenario.grid_freq_profile, ts)
    tariff = sample_tariff(scenario.tariff, ts)
    fcols = np.zeros((L.N_FLOAT, n), dtype=np.float64)
    icols = np.zeros((L.N_INT, n), dtype=np.int64)
    final = np.zeros(L.N_STATE, dtype=np.float64)
    name = backend or BACKEND
    get_kernel(name)(load, irr, freq, tariff, scenario.plant, eng, fcols, icols, final)
    return SimResult(scenario, ts, load, freq, tariff, fcols, icols, final, name)


def trace_records(res: SimResult) -> list[TraceRecord]:
    tariff_names = [Tariff(i).name for i in range(2)]
    mode_names = [EmsMode(i).name for i in range(4)]
    ev_cache: dict[int, tuple[str, ...]] = {}
    f = res.fcols
    i = res.icols
    records = []
    for (t, tar, mode, load, pv, soc, v, grid, inv_ac, export, curtail, freq,
         locked, lockout, ip, ep, ev) in zip(
            res.t.tolist(), res.tariff.tolist(), i[L.I_MODE].tolist(), res.load_w.tolist(),
            f[L.F_PV].tolist(), f[L.F_SOC].tolist(), f[L.F_VBATT].tolist(), f[L.F_GRID].tolist(),
            f[L.F_INV_AC].tolist(), f[L.F_EXPORT].tolist(), f[L.F_CURTAIL].tolist(),
            res.grid_freq_hz.tolist(), i[L.I_LOCKED].tolist(), i[L.I_LOCKOUT].tolist(),
            i[L.I_IMP_PULSES].tolist(), i[L.I_EXP_PULSES].tolist(), i[L.I_EVENTS].tolist()):
        names = ev_cache.get(ev)
        if names is None:
            names = ev_cache[ev] = tuple(unpack_events(ev))
        records.append(TraceRecord(t, tariff_names[tar], mode_names[mode], load, pv, soc, v, grid,
                                   inv_ac, export, curtail, freq, bool(locked), bool(lockout),
                                   ip, ep, names))
    return records


def _monthly_bills(res: SimResult, total: Bill) -> list[Bill]:
    eng = res.scenario.engine
    if eng.duration_s <= MONTH_S:
        return [total]
    bills = []
    grid = res.col("grid_import_w").tolist()
    export = res.col("export_w").tolist()
    tariff = res.tariff.tolist()
    per_month = MONTH_S // eng.dt_s
    for start in range(0, len(grid), per_month):
        meter = MeterState()
        for k in range(start, min(start + per_month, len(grid))):
            meter, _, _ = accumulate(meter, grid[k], export[k], Tariff(tariff[k]), eng.dt_s,
                                     eng.meter_wh_per_pulse)
        bills.append(compute_bill(meter, eng))
    return bills


def build_report(res: SimResult) -> RunReport:
    eng = res.scenario.engine
    kwh = eng.dt_s / 3.6e6
    fin = res.final
    fin = fin.tolist()
    bill = bill_from_kwh(fin[L.S_IMP_PEAK], fin[L.S_IMP_OFFPEAK],
                         fin[L.S_EXP_OFFPEAK] + fin[L.S_EXP_PEAK], eng)

    def total(col, mask=None):
        x = res.col(col) if mask is None else res.col(col)[mask]
        return float(np.sum(x)) * kwh

    served = res.col("served_load_w")
    totals = {
        "grid_import": total("grid_import_w"),
        "grid_import_peak": total("grid_import_w", res.tariff == Tariff.Peak),
        "grid_import_offpeak": total("grid_import_w", res.tariff == Tariff.OffPeak),
        "export": total("export_w"),
        "pv_generated": total("pv_w"),
        "served_load": total("served_load_w"),
        "unserved_load": float(np.sum(res.load_w - served)) * kwh,
        "inverter_ac": total("inv_ac_w"),
        "inverter_dc": total("inv_dc_w"),
        "curtailed": total("curtail_w"),
        "battery_charge": total("batt_charge_w"),
        "battery_discharge": total("batt_discharge_w"),
    }
    ev = res.events
    counts = {k.name: int(np.count_nonzero(ev & k)) for k in EVENT_ORDER}
    grid = res.col("grid_import_w")
    return RunReport(
        bill=bill,
        totals=totals,
        event_counts=counts,
        peak_grid_import_w=float(grid.max()) if grid.size else 0.0,
        ticks=int(res.t.size),
        monthly_bills=_monthly_bills(res, bill),
    )


def simulate(scenario: Scenario, backend: str | None = None) -> tuple[list[TraceRecord], RunReport]:
    res = run(scenario, backend)
    return trace_records(res), build_report(res)


# --- emission ---------------------------------------------------------------

def emit_trace(records, sink=None) -> bytes | None:
    """Write records as CSV.

    Returns the bytes when ``sink`` is None, otherwise writes to the binary
    ``sink`` and returns None.
    """
    lines = [",".join(TRACE_FIELDS)]
    for r in records:
        lines.append(
            f"{r.t},{r.tariff},{r.mode},{r.load_w:.6f},{r.pv_w:.6f},{r.soc_wh:.6f},{r.v_batt:.6f},"
            f"{r.grid_import_w:.6f},{r.inv_ac_w:.6f},{r.export_w:.6f},{r.curtail_w:.6f},"
            f"{r.grid_freq_hz:.6f},{'true' if r.locked else 'false'},{'true' if r.lockout else 'false'},"
            f"{r.import_pulses_cum},{r.export_pulses_cum},{';'.join(r.events)}"
        )
    data = ("\n".join(lines) + "\n").encode()
    if sink is None:
        return data
    sink.write(data)
    return None


def parse_trace(data: bytes) -> list[TraceRecord]:
    records = []
    for row in csv.DictReader(io.StringIO(data.decode())):
        kw = {}
        for name in TRACE_FIELDS:
            raw = row[name]
            if name in _FLOAT_FIELDS:
                kw[name] = float(raw)
            elif name in _INT_FIELDS:
                kw[name] = int(raw)
            elif name in _BOOL_FIELDS:
                kw[name] = raw == "true"
            elif name == "events":
                kw[name] = tuple(raw.split(";")) if raw else ()
            else:
                kw[name] = raw
        records.append(TraceRecord(**kw))
    return records


def report_to_dict(report: RunReport) -> dict:
    return {
        "bill": asdict(report.bill),
        "totals": dict(report.totals),
        "event_counts": dict(report.event_counts),
        "peak_grid_import_w": report.peak_grid_import_w,
        "ticks": report.ticks,
        "monthly_bills": [asdict(b) for b in report.monthly_bills],
    }


def emit_report(report: RunReport, sink=None) -> bytes | None:
    data = (json.dumps(report_to_dict(report), indent=2) + "\n").encode()
    if sink is None:
        return data
    sink.write(data)
    return None
