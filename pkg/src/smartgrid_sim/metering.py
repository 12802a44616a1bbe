"""
Bidirectional pulse meter and time-of-use billing.

The meter integrates import and export energy separately and counts one pulse
per ``meter_wh_per_pulse`` watt-hours of the running total in each direction;
the part of the total not yet worth a pulse is the residual. Billing reads the
exact per-tariff energy ledger rather than the pulse counts, so pulses are an
observable whose error is bounded by one quantum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .scenario import EngineParams, Tariff


class Direction(enum.IntEnum):
    Import = 0
    Export = 1


def _empty_ledger() -> dict:
    return {(d, t): 0.0 for d in Direction for t in Tariff}


@dataclass(frozen=True)
class MeterState:
    import_pulses: int = 0
    export_pulses: int = 0
    import_residual_wh: float = 0.0
    export_residual_wh: float = 0.0
    # (Direction, Tariff) -> kWh
    ledger: dict = field(default_factory=_empty_ledger)
    # integrated energy, Wh; None means pulses * quantum + residual with a 1 Wh quantum
    import_wh: float | None = None
    export_wh: float | None = None

    def __post_init__(self):
        if self.import_wh is None:
            object.__setattr__(self, "import_wh", self.import_pulses + self.import_residual_wh)
        if self.export_wh is None:
            object.__setattr__(self, "export_wh", self.export_pulses + self.export_residual_wh)

    def ledger_kwh(self, direction: Direction, tariff: Tariff | None = None) -> float:
        if tariff is None:
            return sum(v for (d, _), v in self.ledger.items() if d == direction)
        return self.ledger[(direction, tariff)]


@dataclass(frozen=True)
class Bill:
    import_peak_kwh: float = 0.0
    import_offpeak_kwh: float = 0.0
    export_kwh: float = 0.0
    charge_peak: float = 0.0
    charge_offpeak: float = 0.0
    credit_sellback: float = 0.0
    total: float = 0.0


def pulse_split(total_wh: float, wh_per_pulse: float) -> tuple[int, float]:
    """Split an integrated energy into whole pulses and a residual in ``[0, wh_per_pulse)``."""
    n = math.floor(total_wh / wh_per_pulse)
    # the rounded ratio can land one quantum off right at a boundary
    if total_wh - n * wh_per_pulse >= wh_per_pulse:
        n += 1
    elif total_wh - n * wh_per_pulse < 0.0:
        n -= 1
    return n, total_wh - n * wh_per_pulse


def accumulate(
    state: MeterState,
    grid_import_w: float,
    export_w: float,
    tariff: Tariff,
    dt_s: float,
    wh_per_pulse: float = 1.0,
) -> tuple[MeterState, int, int]:
    """Integrate one tick of import and export power.

    Returns the new state and the number of import and export pulses emitted
    during this tick.
    """
    imp_wh = grid_import_w * dt_s / 3600.0
    exp_wh = export_w * dt_s / 3600.0
    imp_total = state.import_wh + imp_wh
    exp_total = state.export_wh + exp_wh
    imp_pulses, imp_res = pulse_split(imp_total, wh_per_pulse)
    exp_pulses, exp_res = pulse_split(exp_total, wh_per_pulse)
    ledger = dict(state.ledger)
    ledger[(Direction.Import, tariff)] += imp_wh / 1000.0
    ledger[(Direction.Export, tariff)] += exp_wh / 1000.0
    new = MeterState(imp_pulses, exp_pulses, imp_res, exp_res, ledger, imp_total, exp_total)
    return new, imp_pulses - state.import_pulses, exp_pulses - state.export_pulses


def bill_from_kwh(import_peak_kwh: float, import_offpeak_kwh: float, export_kwh: float,
                  engine: EngineParams) -> Bill:
    charge_peak = import_peak_kwh * engine.price_peak
    charge_offpeak = import_offpeak_kwh * engine.price_offpeak
    credit = export_kwh * engine.price_sellback
    return Bill(
        import_peak_kwh,
        import_offpeak_kwh,
        export_kwh,
        charge_peak,
        charge_offpeak,
        credit,
        charge_peak + charge_offpeak - credit,
    )


def compute_bill(state: MeterState, engine: EngineParams) -> Bill:
    return bill_from_kwh(
        state.ledger[(Direction.Import, Tariff.Peak)],
        state.ledger[(Direction.Import, Tariff.OffPeak)],
        state.ledger_kwh(Direction.Export),
        engine,
    )
