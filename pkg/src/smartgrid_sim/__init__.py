"""Deterministic discrete-time simulator of a rule-based PV/battery/grid
energy controller with grid synchronisation, pulse metering and
time-of-use billing."""

from ._core import BACKEND
from .engine import RunReport, TraceRecord, emit_report, emit_trace, parse_trace, run, simulate
from .errors import (ContractViolation, InternalInvariantError, ParseError, SimulatorError,
                     ValidationError)
from .scenario import (EngineParams, PlantParams, ProfilePoint, Scenario, Tariff, TariffSchedule,
                       ToggleState, emit_scenario, load_scenario, load_scenario_file, profile_at,
                       tariff_at)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ContractViolation", "EngineParams", "InternalInvariantError", "ParseError",
    "PlantParams", "ProfilePoint", "RunReport", "Scenario", "SimulatorError", "Tariff",
    "TariffSchedule", "ToggleState", "TraceRecord", "ValidationError", "emit_report",
    "emit_scenario", "emit_trace", "load_scenario", "load_scenario_file", "parse_trace",
    "profile_at", "run", "simulate", "tariff_at",
]
