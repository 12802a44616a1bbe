"""
Rule-based energy-management controller.

Each tick the controller first runs the over-limit sequencer (beep while the
load exceeds the limit during peak hours, disconnect once the grace period is
used up, reconnect after the load has stayed under the limit long enough) and
then, unless the consumer is shed, picks the supply source:

=====================  ==========  ===============
battery voltage        tariff      mode
=====================  ==========  ===============
below cutoff           any         GridSupply
at or above cutoff     Peak        InverterLocal
at or above cutoff     OffPeak     GridTieExport
=====================  ==========  ===============

Events inside one tick are ordered TariffChange, Beep, Disconnect, Reconnect,
BatteryLowInhibit. Synchronisation events are appended by the engine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .scenario import EngineParams, PlantParams, Tariff


class EmsMode(enum.IntEnum):
    GridSupply = 0
    InverterLocal = 1
    GridTieExport = 2
    Shed = 3


class EventKind(enum.IntEnum):
    """Event kinds; the value is the bit used in packed per-tick masks and
    also fixes the emission order within a tick."""

    TariffChange = 1 << 0
    Beep = 1 << 1
    Disconnect = 1 << 2
    Reconnect = 1 << 3
    BatteryLowInhibit = 1 << 4
    ProtectionLockout = 1 << 5
    SyncLoss = 1 << 6
    SyncLock = 1 << 7


EVENT_ORDER: tuple[EventKind, ...] = tuple(EventKind)


def unpack_events(mask: int) -> list[str]:
    return [k.name for k in EVENT_ORDER if mask & k]


def pack_events(events) -> int:
    mask = 0
    for e in events:
        mask |= e.kind
    return mask


@dataclass(frozen=True, slots=True)
class EmsEvent:
    kind: EventKind
    t: int = 0
    to: Tariff | None = None  # set for TariffChange only

    @property
    def name(self) -> str:
        return self.kind.name


@dataclass(frozen=True, slots=True)
class EmsState:
    mode: EmsMode = EmsMode.GridSupply
    over_limit_ticks: int = 0
    under_limit_ticks: int = 0
    # tariff seen on the previous tick; None before the first tick
    tariff: Tariff | None = None
    # previous non-shed tick ran on grid because of a low battery
    inhibited: bool = False

    @property
    def shed(self) -> bool:
        return self.mode == EmsMode.Shed


def select_mode(tariff: Tariff, v_batt: float, pv_w: float, load_w: float, params: PlantParams) -> EmsMode:
    if v_batt < params.inverter_cutoff_v:
        return EmsMode.GridSupply
    if tariff == Tariff.Peak:
        return EmsMode.InverterLocal
    return EmsMode.GridTieExport


def shed_update(
    state: EmsState,
    load_w: float,
    tariff: Tariff,
    engine: EngineParams,
    t: int = 0,
) -> tuple[EmsState, list[EmsEvent]]:
    events = []
    over = load_w > engine.load_limit_w
    if state.shed:
        if over:
            return replace(state, under_limit_ticks=0), events
        under = state.under_limit_ticks + 1
        if under * engine.dt_s >= engine.reconnect_hold_s:
            events.append(EmsEvent(EventKind.Reconnect, t))
            # leaving Shed; the caller picks the supply mode for this tick
            return replace(state, mode=EmsMode.GridSupply, under_limit_ticks=0, over_limit_ticks=0), events
        return replace(state, under_limit_ticks=under), events

    if over and tariff == Tariff.Peak:
        count = state.over_limit_ticks + 1
        events.append(EmsEvent(EventKind.Beep, t))
        if count * engine.dt_s >= engine.shed_grace_s:
            events.append(EmsEvent(EventKind.Disconnect, t))
            return replace(state, mode=EmsMode.Shed, over_limit_ticks=0, under_limit_ticks=0), events
        return replace(state, over_limit_ticks=count), events
    if state.over_limit_ticks:
        return replace(state, over_limit_ticks=0), events
    return state, events


def controller_tick(
    state: EmsState,
    tariff: Tariff,
    v_batt: float,
    pv_w: float,
    load_w: float,
    params: PlantParams,
    engine: EngineParams,
    t: int = 0,
) -> tuple[EmsState, EmsMode, list[EmsEvent]]:
    events = []
    if state.tariff is not None and tariff != state.tariff:
        events.append(EmsEvent(EventKind.TariffChange, t, tariff))
    state, shed_events = shed_update(state, load_w, tariff, engine, t)
    events.extend(shed_events)
    if state.shed:
        return replace(state, tariff=tariff), EmsMode.Shed, events

    mode = select_mode(tariff, v_batt, pv_w, load_w, params)
    low = v_batt < params.inverter_cutoff_v
    if low and not state.inhibited:
        events.append(EmsEvent(EventKind.BatteryLowInhibit, t))
    return replace(state, mode=mode, tariff=tariff, inhibited=low), mode, events
