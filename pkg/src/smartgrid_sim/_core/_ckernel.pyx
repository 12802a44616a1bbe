# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled tick loop.

Same arithmetic, in the same order, as the pure-Python loop in ``_pykernel``;
the test-suite checks both produce identical columns.
"""

from libc.math cimport floor, fabs, M_PI

from ..errors import InternalInvariantError

cdef double TWO_PI = 2.0 * M_PI
cdef double BAL_TOL = 1e-9

# EmsMode
cdef enum:
    GRID_SUPPLY = 0
    INVERTER_LOCAL = 1
    GRID_TIE_EXPORT = 2
    SHED = 3

# EventKind bits
cdef enum:
    EV_TARIFF = 1
    EV_BEEP = 2
    EV_DISCONNECT = 4
    EV_RECONNECT = 8
    EV_LOW = 16
    EV_LOCKOUT = 32
    EV_SYNCLOSS = 64
    EV_SYNCLOCK = 128


cdef inline double wrap_phase(double x) nogil:
    cdef double y = x - TWO_PI * floor(x / TWO_PI)
    if y >= TWO_PI or y < 0.0:
        y = 0.0
    return y


cdef inline double phase_error(double grid, double inv) nogil:
    cdef double d = wrap_phase(grid - inv)
    if d >= M_PI:
        return d - TWO_PI
    return d


cdef inline double pulse_split(double total, double q, long long *n) nogil:
    cdef double k = floor(total / q)
    if total - k * q >= q:
        k += 1
    elif total - k * q < 0.0:
        k -= 1
    n[0] = <long long>k
    return total - k * q


def run_ticks(double[::1] load, double[::1] irr, double[::1] freq, signed char[::1] tariff,
              plant, engine, double[:, ::1] fcols, long long[:, ::1] icols, double[::1] final):
    cdef Py_ssize_t n = load.shape[0]
    cdef Py_ssize_t k
    cdef long long dt = engine.dt_s
    cdef double ddt = <double>dt

    cdef double pv_rated = plant.pv_rated_w
    cdef double cap_wh = plant.battery_capacity_wh
    cdef double v_empty = plant.battery_v_empty
    cdef double v_full = plant.battery_v_full
    cdef double cutoff = plant.inverter_cutoff_v
    cdef double eta = plant.inverter_efficiency
    cdef double inv_max = plant.inverter_max_ac_w
    cdef double max_charge = plant.max_charge_w
    cdef double max_discharge = plant.max_discharge_w
    cdef double hz = plant.ac_nominal_hz

    cdef double limit = engine.load_limit_w
    cdef double grace = engine.shed_grace_s
    cdef double hold = engine.reconnect_hold_s
    cdef double ftol = engine.freq_tolerance_hz
    cdef double ptol = engine.phase_tolerance_rad
    cdef double q = engine.meter_wh_per_pulse
    cdef double slew = engine.sync_slew_rad_per_s

    # plant / controller / sync / meter state
    cdef double soc = plant.initial_soc_wh
    cdef int shed = 0, inhibited = 0, have_prev = 0, prev_tar = 0
    cdef long long over_cnt = 0, under_cnt = 0
    cdef double gphase = 0.0
    cdef double iphase = wrap_phase(-<double>engine.initial_phase_offset_rad)
    cdef int locked = 0, lockout = 0, crossed
    cdef double imp_res = 0.0, exp_res = 0.0, imp_total = 0.0, exp_total = 0.0
    cdef long long imp_pulses = 0, exp_pulses = 0
    cdef double led_imp[2]
    cdef double led_exp[2]
    led_imp[0] = 0.0; led_imp[1] = 0.0
    led_exp[0] = 0.0; led_exp[1] = 0.0

    cdef double pv, v, ld, f, cycles, turns, nominal, err, step
    cdef double room, cap, served, grid, charge, discharge, curtail, inv_dc, inv_ac, export
    cdef double target_ac, target_dc, pv_used, shortfall, surplus, request, need
    cdef double export_dc, local_ac, room_dc, local, imp_wh, exp_wh, soc_new
    cdef int tar, mode, over
    cdef long long ev
    cdef int bad = 0
    cdef Py_ssize_t bad_tick = 0

    with nogil:
        for k in range(n):
            tar = tariff[k]
            ld = load[k]
            ev = 0

            pv = irr[k] * pv_rated
            v = v_empty + (v_full - v_empty) * (soc / cap_wh)

            # controller
            if have_prev and tar != prev_tar:
                ev |= EV_TARIFF
            over = ld > limit
            if shed:
                if over:
                    under_cnt = 0
                else:
                    under_cnt += 1
                    if <double>(under_cnt * dt) >= hold:
                        ev |= EV_RECONNECT
                        shed = 0
                        under_cnt = 0
                        over_cnt = 0
            elif over and tar == 1:
                over_cnt += 1
                ev |= EV_BEEP
                if <double>(over_cnt * dt) >= grace:
                    ev |= EV_DISCONNECT
                    shed = 1
                    over_cnt = 0
                    under_cnt = 0
            else:
                over_cnt = 0
            prev_tar = tar
            have_prev = 1
            if shed:
                mode = SHED
            else:
                if v < cutoff:
                    mode = GRID_SUPPLY
                elif tar == 1:
                    mode = INVERTER_LOCAL
                else:
                    mode = GRID_TIE_EXPORT
                if v < cutoff:
                    if not inhibited:
                        ev |= EV_LOW
                    inhibited = 1
                else:
                    inhibited = 0

            # synchronisation
            f = freq[k]
            cycles = f * ddt
            turns = gphase / TWO_PI + cycles
            crossed = turns >= 1.0
            gphase = wrap_phase(gphase + TWO_PI * (cycles - floor(cycles)))
            if locked:
                iphase = gphase
            else:
                nominal = hz * ddt
                iphase = wrap_phase(iphase + TWO_PI * (nominal - floor(nominal)))
                err = phase_error(gphase, iphase)
                step = slew * ddt
                if err > step:
                    err = step
                elif err < -step:
                    err = -step
                iphase = wrap_phase(iphase + err)
            if fabs(f - hz) > ftol:
                if not lockout:
                    ev |= EV_LOCKOUT
                if locked:
                    ev |= EV_SYNCLOSS
                locked = 0
                lockout = 1
            else:
                lockout = 0
                if not locked and crossed:
                    if fabs(phase_error(gphase, iphase)) <= ptol:
                        locked = 1
                        ev |= EV_SYNCLOCK

            # dispatch
            room = (cap_wh - soc) * 3600.0 / ddt
            cap = room if room <= max_charge else max_charge
            grid = 0.0
            inv_dc = 0.0
            inv_ac = 0.0
            export = 0.0
            discharge = 0.0
            if mode == GRID_SUPPLY or mode == SHED:
                served = ld if mode == GRID_SUPPLY else 0.0
                grid = served
                charge = pv if pv <= cap else cap
                curtail = pv - charge
                soc_new = soc + charge * ddt / 3600.0
                if soc_new > cap_wh:
                    soc_new = cap_wh
            else:
                served = ld
                target_ac = ld if ld <= inv_max else inv_max
                target_dc = target_ac / eta
                pv_used = pv if pv <= target_dc else target_dc
                shortfall = target_dc - pv_used
                surplus = pv - pv_used
                if shortfall > 0:
                    request = shortfall if shortfall <= max_discharge else max_discharge
                    need = request * ddt / 3600.0
                    if need >= soc:
                        soc_new = 0.0
                        discharge = soc * 3600.0 / ddt
                    else:
                        soc_new = soc - need
                        discharge = request
                    charge = 0.0
                else:
                    charge = surplus if surplus <= cap else cap
                    soc_new = soc + charge * ddt / 3600.0
                    if soc_new > cap_wh:
                        soc_new = cap_wh
                surplus = surplus - charge
                export_dc = 0.0
                if mode == GRID_TIE_EXPORT and locked and surplus > 0:
                    local_ac = eta * (pv_used + discharge)
                    room_dc = (inv_max - local_ac) / eta
                    if room_dc > 0:
                        export_dc = surplus if surplus <= room_dc else room_dc
                curtail = surplus - export_dc
                inv_dc = pv_used + discharge + export_dc
                inv_ac = eta * inv_dc
                if inv_ac > inv_max:
                    inv_ac = inv_max
                export = eta * export_dc
                local = inv_ac - export
                grid = ld - local if ld > local else 0.0

            if (grid < 0 or inv_ac < 0 or inv_dc < 0 or charge < 0 or discharge < 0
                    or export < 0 or curtail < 0 or served < 0 or pv < 0
                    or fabs(pv + discharge - (inv_dc + charge + curtail)) > BAL_TOL
                    or fabs(grid + inv_ac - (served + export)) > BAL_TOL
                    or fabs(inv_ac - eta * inv_dc) > BAL_TOL
                    or (charge > 0 and discharge > 0)):
                bad = 1
                bad_tick = k
                break

            # metering
            imp_wh = grid * ddt / 3600.0
            exp_wh = export * ddt / 3600.0
            imp_total = imp_total + imp_wh
            exp_total = exp_total + exp_wh
            imp_res = pulse_split(imp_total, q, &imp_pulses)
            exp_res = pulse_split(exp_total, q, &exp_pulses)
            led_imp[tar] += imp_wh / 1000.0
            led_exp[tar] += exp_wh / 1000.0

            fcols[0, k] = soc
            fcols[1, k] = v
            fcols[2, k] = pv
            fcols[3, k] = grid
            fcols[4, k] = inv_ac
            fcols[5, k] = inv_dc
            fcols[6, k] = export
            fcols[7, k] = curtail
            fcols[8, k] = charge
            fcols[9, k] = discharge
            fcols[10, k] = served
            icols[0, k] = mode
            icols[1, k] = locked
            icols[2, k] = lockout
            icols[3, k] = imp_pulses
            icols[4, k] = exp_pulses
            icols[5, k] = ev
            soc = soc_new

    if bad:
        raise InternalInvariantError(bad_tick, "power-flow contract violated in dispatch")

    final[0] = soc
    final[1] = led_imp[0]
    final[2] = led_imp[1]
    final[3] = led_exp[0]
    final[4] = led_exp[1]
    final[5] = imp_res
    final[6] = exp_res
    final[7] = gphase
    final[8] = iphase
