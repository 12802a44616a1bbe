"""
Zero-crossing synchronisation of the inverter to the grid, with frequency
protection.

Phases are tracked as accumulators advanced once per tick. A tick is a
zero-crossing tick when the grid phase wraps past 2*pi during it; with
one-second ticks on a 50 Hz grid every tick qualifies, so lock acquisition is
then governed by the phase error alone. While unlocked the inverter runs at
nominal frequency and slews its phase toward the grid at a bounded rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ems import EmsEvent, EventKind
from .scenario import EngineParams, PlantParams

TWO_PI = 2.0 * math.pi
SLEW_RAD_PER_S = 0.5


def wrap_phase(x: float) -> float:
    """Normalise an angle to ``[0, 2*pi)``."""
    y = x - TWO_PI * math.floor(x / TWO_PI)
    if y >= TWO_PI or y < 0.0:
        y = 0.0
    return y


def phase_error(grid_phase: float, inv_phase: float) -> float:
    """Signed circular difference ``grid - inverter`` in ``[-pi, pi)``."""
    d = wrap_phase(grid_phase - inv_phase)
    return d - TWO_PI if d >= math.pi else d


@dataclass(frozen=True, slots=True)
class SyncState:
    grid_phase_rad: float = 0.0
    inv_phase_rad: float = 0.0
    grid_freq_hz: float = 50.0
    locked: bool = False
    lockout: bool = False
    # grid phase wrapped during the last advance
    crossed: bool = False


def phase_advance(
    state: SyncState,
    dt_s: float,
    params: PlantParams,
    slew_rad_per_s: float = SLEW_RAD_PER_S,
) -> SyncState:
    cycles = state.grid_freq_hz * dt_s
    turns = state.grid_phase_rad / TWO_PI + cycles
    crossed = turns >= 1.0
    grid = wrap_phase(state.grid_phase_rad + TWO_PI * (cycles - math.floor(cycles)))
    if state.locked:
        inv = grid
    else:
        nominal = params.ac_nominal_hz * dt_s
        inv = wrap_phase(state.inv_phase_rad + TWO_PI * (nominal - math.floor(nominal)))
        err = phase_error(grid, inv)
        step = slew_rad_per_s * dt_s
        if err > step:
            err = step
        elif err < -step:
            err = -step
        inv = wrap_phase(inv + err)
    return SyncState(grid, inv, state.grid_freq_hz, state.locked, state.lockout, crossed)


def try_lock(
    state: SyncState,
    engine: EngineParams,
    params: PlantParams,
    t: int = 0,
) -> tuple[SyncState, list[EmsEvent]]:
    events = []
    if abs(state.grid_freq_hz - params.ac_nominal_hz) > engine.freq_tolerance_hz:
        if not state.lockout:
            events.append(EmsEvent(EventKind.ProtectionLockout, t))
        if state.locked:
            events.append(EmsEvent(EventKind.SyncLoss, t))
        return SyncState(state.grid_phase_rad, state.inv_phase_rad, state.grid_freq_hz,
                         False, True, state.crossed), events
    locked = state.locked
    if not locked and state.crossed:
        err = abs(phase_error(state.grid_phase_rad, state.inv_phase_rad))
        if err <= engine.phase_tolerance_rad:
            locked = True
            events.append(EmsEvent(EventKind.SyncLock, t))
    return SyncState(state.grid_phase_rad, state.inv_phase_rad, state.grid_freq_hz,
                     locked, False, state.crossed), events
