"""Column layout shared by the compiled and pure-Python tick loops."""

# float64 columns, shape (N_FLOAT, n_ticks)
F_SOC = 0  # start-of-tick state of charge, Wh
F_VBATT = 1
F_PV = 2
F_GRID = 3
F_INV_AC = 4
F_INV_DC = 5
F_EXPORT = 6
F_CURTAIL = 7
F_CHARGE = 8
F_DISCHARGE = 9
F_SERVED = 10
N_FLOAT = 11

# int64 columns, shape (N_INT, n_ticks)
I_MODE = 0
I_LOCKED = 1
I_LOCKOUT = 2
I_IMP_PULSES = 3  # cumulative
I_EXP_PULSES = 4  # cumulative
I_EVENTS = 5  # EventKind bit mask
N_INT = 6

# float64 final-state vector
S_SOC = 0
S_IMP_OFFPEAK = 1  # kWh ledger entries
S_IMP_PEAK = 2
S_EXP_OFFPEAK = 3
S_EXP_PEAK = 4
S_IMP_RESIDUAL = 5
S_EXP_RESIDUAL = 6
S_GRID_PHASE = 7
S_INV_PHASE = 8
N_STATE = 9
