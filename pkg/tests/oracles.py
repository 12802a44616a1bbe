"""Independent reference computations used by the tests.

None of these import the code paths they check: the controller oracle is a
declarative window formulation of the rule table, not a counter machine, and
the billing oracle folds the raw trace in one pass.
"""

from functools import lru_cache

EMS_EVENTS = ("TariffChange", "Beep", "Disconnect", "Reconnect", "BatteryLowInhibit")


def ticks_needed(seconds, dt):
    """Smallest whole number of ticks covering ``seconds``."""
    m = 1
    while m * dt < seconds:
        m += 1
    return m


def controller_oracle(tariffs, volts, loads, *, limit, grace_s, hold_s, dt, cutoff):
    """Expected (mode, events) per tick for the controller rule table.

    ``tariffs`` are "Peak"/"OffPeak" strings; modes and events are returned by
    name.

    The consumer is shed after tick ``k`` iff it was disconnected at ``k``, or
    it was shed before ``k`` and not reconnected at ``k``. A disconnect happens
    at ``k`` when the last ``ceil(grace/dt)`` ticks were all over the limit at
    peak and the consumer was connected going into each of them; a reconnect
    happens when the last ``ceil(hold/dt)`` ticks were all under the limit and
    the consumer was shed going into each of them.
    """
    n = len(loads)
    g = ticks_needed(grace_s, dt)
    h = ticks_needed(hold_s, dt)

    def over(k):
        return tariffs[k] == "Peak" and loads[k] > limit

    def under(k):
        return loads[k] <= limit

    @lru_cache(maxsize=None)
    def shed_after(k):
        if k < 0:
            return False
        return disconnect(k) or (shed_after(k - 1) and not reconnect(k))

    def disconnect(k):
        start = k - g + 1
        if start < 0:
            return False
        return all(over(j) for j in range(start, k + 1)) and not any(
            shed_after(j) for j in range(start - 1, k))

    def reconnect(k):
        start = k - h + 1
        if start < 0:
            return False
        return all(under(j) for j in range(start, k + 1)) and all(
            shed_after(j) for j in range(start - 1, k))

    for k in range(n):  # fill the cache bottom-up to keep recursion shallow
        shed_after(k)

    modes, events = [], []
    last_connected_low = None
    for k in range(n):
        ev = []
        if k > 0 and tariffs[k] != tariffs[k - 1]:
            ev.append("TariffChange")
        if not shed_after(k - 1) and over(k):
            ev.append("Beep")
        if disconnect(k):
            ev.append("Disconnect")
        if reconnect(k):
            ev.append("Reconnect")
        if shed_after(k):
            mode = "Shed"
        else:
            low = volts[k] < cutoff
            if low:
                mode = "GridSupply"
                if not last_connected_low:
                    ev.append("BatteryLowInhibit")
            elif tariffs[k] == "Peak":
                mode = "InverterLocal"
            else:
                mode = "GridTieExport"
            last_connected_low = low
        modes.append(mode)
        events.append(ev)
    return modes, events


def bill_fold(records, engine):
    """Single pass over trace records: price every tick's import and export."""
    total = 0.0
    for r in records:
        price = engine.price_peak if r.tariff == "Peak" else engine.price_offpeak
        total += price * r.grid_import_w * engine.dt_s / 3.6e6
        total -= engine.price_sellback * r.export_w * engine.dt_s / 3.6e6
    return total


def scalar_meter(powers_w, dt, wh_per_pulse):
    """Pulse counts after each tick from plain running energy totals."""
    energy = 0.0
    out = []
    for p in powers_w:
        energy += p * dt / 3600.0
        out.append((int(energy // wh_per_pulse), energy))
    return out
