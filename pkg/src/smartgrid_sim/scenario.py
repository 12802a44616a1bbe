"""
Scenario definition, JSON ingestion and point-in-time queries.

A scenario document is a single JSON object::

    {
      "load_profile":       [[0, 120.0], [3600, 210.0]],
      "irradiance_profile": [[0, 0.0], [21600, 0.8]],
      "grid_freq_profile":  [[0, 50.0]],
      "tariff": {"peak_windows": [[61200, 79200]],
                 "toggles": [[62000, "offpeak"]]},
      "plant":  {"battery_capacity_wh": 84.0},
      "engine": {"duration_s": 3600}
    }

Profiles are step-held: the value of a profile at time ``t`` is the value of
the latest point whose timestamp is ``<= t``. Omitted ``plant`` and ``engine``
fields take the defaults of :class:`PlantParams` and :class:`EngineParams`.
"""

from __future__ import annotations

import bisect
import enum
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, BinaryIO, Iterable

from .errors import ParseError, ValidationError

SECONDS_PER_DAY = 86400


class Tariff(enum.IntEnum):
    OffPeak = 0
    Peak = 1


class ToggleState(enum.Enum):
    """Forced tariff state set by the operator's peak-hour button."""

    Peak = "peak"
    OffPeak = "offpeak"
    Auto = "auto"


@dataclass(frozen=True)
class ProfilePoint:
    t: int
    value: float


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_finite(name: str, x: Any) -> float:
    if not _is_number(x) or not math.isfinite(x):
        raise ValidationError(name, f"expected a finite number, got {x!r}")
    return float(x)


def _check_int(name: str, x: Any) -> int:
    if isinstance(x, float) and x.is_integer():
        x = int(x)
    if not isinstance(x, int) or isinstance(x, bool):
        raise ValidationError(name, f"expected an integer, got {x!r}")
    return x


def validate_profile(name: str, points: Iterable[ProfilePoint], upper: float | None = None) -> None:
    """Raise :class:`ValidationError` naming ``name`` if the profile is malformed."""
    points = list(points)
    if not points:
        raise ValidationError(name, "profile must not be empty")
    if points[0].t != 0:
        raise ValidationError(name, "first point must have t = 0")
    prev = -1
    for p in points:
        if p.t <= prev:
            raise ValidationError(name, f"timestamps must be strictly increasing (t={p.t})")
        prev = p.t
        if not math.isfinite(p.value) or p.value < 0:
            raise ValidationError(name, f"value at t={p.t} must be >= 0")
        if upper is not None and p.value > upper:
            raise ValidationError(name, f"value at t={p.t} must be <= {upper}")


@dataclass(frozen=True)
class TariffSchedule:
    """Daily peak windows ``[start_s, end_s)`` plus scripted button toggles."""

    peak_windows: tuple[tuple[int, int], ...] = ()
    toggle_events: tuple[tuple[int, ToggleState], ...] = ()

    def __post_init__(self):
        last_end = -1
        for start, end in sorted(self.peak_windows):
            if not (0 <= start < end <= SECONDS_PER_DAY):
                raise ValidationError(
                    "peak_windows", f"window [{start}, {end}) must satisfy 0 <= start < end <= 86400"
                )
            if start < last_end:
                raise ValidationError("peak_windows", "windows overlap")
            last_end = end
        prev = -1
        for t, state in self.toggle_events:
            if t < 0 or t < prev:
                raise ValidationError("toggles", "toggle events must be sorted by t and t >= 0")
            if not isinstance(state, ToggleState):
                raise ValidationError("toggles", f"unknown toggle state {state!r}")
            prev = t


@dataclass(frozen=True)
class PlantParams:
    pv_rated_w: float = 100.0
    battery_capacity_wh: float = 84.0
    battery_v_empty: float = 11.0
    battery_v_full: float = 13.0
    inverter_cutoff_v: float = 12.0
    inverter_efficiency: float = 0.90
    inverter_max_ac_w: float = 200.0
    max_charge_w: float = 50.0
    max_discharge_w: float = 250.0
    ac_nominal_v: float = 220.0
    ac_nominal_hz: float = 50.0
    # None means half of capacity
    initial_soc_wh: float | None = None

    def __post_init__(self):
        if self.initial_soc_wh is None:
            object.__setattr__(self, "initial_soc_wh", self.battery_capacity_wh / 2)
        for f in fields(self):
            _check_finite(f.name, getattr(self, f.name))
        for name in ("pv_rated_w", "battery_capacity_wh", "inverter_efficiency", "inverter_max_ac_w",
                     "max_charge_w", "max_discharge_w", "ac_nominal_v", "ac_nominal_hz"):
            if getattr(self, name) <= 0:
                raise ValidationError(name, "must be strictly positive")
        if self.inverter_efficiency > 1:
            raise ValidationError("inverter_efficiency", "must be <= 1")
        if not self.battery_v_empty < self.inverter_cutoff_v:
            raise ValidationError("inverter_cutoff_v", "must exceed battery_v_empty")
        if not self.inverter_cutoff_v < self.battery_v_full:
            raise ValidationError("inverter_cutoff_v", "must be below battery_v_full")
        if not 0 <= self.initial_soc_wh <= self.battery_capacity_wh:
            raise ValidationError("initial_soc_wh", "must lie in [0, battery_capacity_wh]")


@dataclass(frozen=True)
class EngineParams:
    dt_s: int = 1
    duration_s: int = SECONDS_PER_DAY
    load_limit_w: float = 200.0
    shed_grace_s: float = 5.0
    reconnect_hold_s: float = 30.0
    freq_tolerance_hz: float = 0.5
    phase_tolerance_rad: float = 0.1
    meter_wh_per_pulse: float = 1.0
    price_peak: float = 12.0
    price_offpeak: float = 6.0
    price_sellback: float = 4.0
    sync_slew_rad_per_s: float = 0.5
    initial_phase_offset_rad: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "dt_s", _check_int("dt_s", self.dt_s))
        object.__setattr__(self, "duration_s", _check_int("duration_s", self.duration_s))
        for f in fields(self):
            _check_finite(f.name, getattr(self, f.name))
        if self.dt_s < 1:
            raise ValidationError("dt_s", "must be >= 1")
        if self.duration_s <= 0 or self.duration_s % self.dt_s:
            raise ValidationError("duration_s", "must be a positive multiple of dt_s")
        if self.load_limit_w <= 0:
            raise ValidationError("load_limit_w", "must be > 0")
        if self.shed_grace_s < self.dt_s:
            raise ValidationError("shed_grace_s", "must be >= dt_s")
        for name in ("reconnect_hold_s", "freq_tolerance_hz", "phase_tolerance_rad", "meter_wh_per_pulse"):
            if getattr(self, name) <= 0:
                raise ValidationError(name, "must be > 0")
        for name in ("price_peak", "price_offpeak", "price_sellback", "sync_slew_rad_per_s"):
            if getattr(self, name) < 0:
                raise ValidationError(name, "must be >= 0")

    @property
    def n_ticks(self) -> int:
        return self.duration_s // self.dt_s


@dataclass(frozen=True)
class Scenario:
    load_profile: tuple[ProfilePoint, ...]
    irradiance_profile: tuple[ProfilePoint, ...]
    grid_freq_profile: tuple[ProfilePoint, ...]
    tariff: TariffSchedule = field(default_factory=TariffSchedule)
    plant: PlantParams = field(default_factory=PlantParams)
    engine: EngineParams = field(default_factory=EngineParams)

    def __post_init__(self):
        for name in ("load_profile", "irradiance_profile", "grid_freq_profile"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        validate_profile("load_profile", self.load_profile)
        validate_profile("irradiance_profile", self.irradiance_profile, upper=1.0)
        validate_profile("grid_freq_profile", self.grid_freq_profile)


def profile_at(profile: list[ProfilePoint] | tuple[ProfilePoint, ...], t: float) -> float:
    """Step-hold lookup: value of the latest point with ``point.t <= t``."""
    i = bisect.bisect_right([p.t for p in profile], t) - 1
    return profile[max(i, 0)].value


def tariff_at(schedule: TariffSchedule, t: int) -> Tariff:
    forced = ToggleState.Auto
    for toggle_t, state in schedule.toggle_events:
        if toggle_t > t:
            break
        forced = state
    if forced is ToggleState.Peak:
        return Tariff.Peak
    if forced is ToggleState.OffPeak:
        return Tariff.OffPeak
    tod = t % SECONDS_PER_DAY
    for start, end in schedule.peak_windows:
        if start <= tod < end:
            return Tariff.Peak
    return Tariff.OffPeak


# --- JSON document <-> Scenario -------------------------------------------

_TOP_KEYS = {"load_profile", "irradiance_profile", "grid_freq_profile", "tariff", "plant", "engine"}


def _parse_profile(name: str, raw: Any) -> tuple[ProfilePoint, ...]:
    if not isinstance(raw, list):
        raise ValidationError(name, "expected an array of [t, value] pairs")
    points = []
    for item in raw:
        if not isinstance(item, list) or len(item) != 2:
            raise ValidationError(name, f"expected a [t, value] pair, got {item!r}")
        t = _check_int(name, item[0])
        if t < 0:
            raise ValidationError(name, "t must be >= 0")
        points.append(ProfilePoint(t, _check_finite(name, item[1])))
    return tuple(points)


def _parse_tariff(raw: Any) -> TariffSchedule:
    if not isinstance(raw, dict):
        raise ValidationError("tariff", "expected an object")
    unknown = set(raw) - {"peak_windows", "toggles"}
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown key in tariff")
    windows = []
    for w in raw.get("peak_windows", []):
        if not isinstance(w, list) or len(w) != 2:
            raise ValidationError("peak_windows", f"expected [start, end], got {w!r}")
        windows.append((_check_int("peak_windows", w[0]), _check_int("peak_windows", w[1])))
    toggles = []
    for item in raw.get("toggles", []):
        if not isinstance(item, list) or len(item) != 2:
            raise ValidationError("toggles", f"expected [t, state], got {item!r}")
        try:
            state = ToggleState(item[1])
        except ValueError:
            raise ValidationError("toggles", f"unknown toggle state {item[1]!r}") from None
        toggles.append((_check_int("toggles", item[0]), state))
    return TariffSchedule(tuple(windows), tuple(toggles))


def _parse_params(cls, key: str, raw: Any):
    if not isinstance(raw, dict):
        raise ValidationError(key, "expected an object")
    known = {f.name for f in fields(cls)}
    for name, value in raw.items():
        if name not in known:
            raise ValidationError(name, f"unknown key in {key}")
        if not _is_number(value) and not (name == "initial_soc_wh" and value is None):
            raise ValidationError(name, f"expected a number, got {value!r}")
    return cls(**raw)


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown top-level key")
    for name in ("load_profile", "irradiance_profile", "grid_freq_profile"):
        if name not in doc:
            raise ValidationError(name, "required profile is missing")
    return Scenario(
        load_profile=_parse_profile("load_profile", doc["load_profile"]),
        irradiance_profile=_parse_profile("irradiance_profile", doc["irradiance_profile"]),
        grid_freq_profile=_parse_profile("grid_freq_profile", doc["grid_freq_profile"]),
        tariff=_parse_tariff(doc.get("tariff", {})),
        plant=_parse_params(PlantParams, "plant", doc.get("plant", {})),
        engine=_parse_params(EngineParams, "engine", doc.get("engine", {})),
    )


def load_scenario(source: bytes | str | BinaryIO) -> Scenario:
    """Parse and validate a scenario document.

    ``source`` may be raw bytes, a string, or a readable binary stream.
    Raises :class:`ParseError` for malformed JSON and :class:`ValidationError`
    (naming the field) for any invariant violation.
    """
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed scenario document: {exc}") from None
    return scenario_from_dict(doc)


def load_scenario_file(path) -> Scenario:
    with open(path, "rb") as fh:
        return load_scenario(fh)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "load_profile": [[p.t, p.value] for p in s.load_profile],
        "irradiance_profile": [[p.t, p.value] for p in s.irradiance_profile],
        "grid_freq_profile": [[p.t, p.value] for p in s.grid_freq_profile],
        "tariff": {
            "peak_windows": [[a, b] for a, b in s.tariff.peak_windows],
            "toggles": [[t, state.value] for t, state in s.tariff.toggle_events],
        },
        "plant": asdict(s.plant),
        "engine": asdict(s.engine),
    }


def emit_scenario(s: Scenario) -> bytes:
    return json.dumps(scenario_to_dict(s), indent=2).encode()
