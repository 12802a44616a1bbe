import json

import numpy as np
import pytest

from smartgrid_sim import (ContractViolation, InternalInvariantError, emit_report, emit_trace, parse_trace,
                           simulate)
from smartgrid_sim._core import KERNELS, _pykernel
from smartgrid_sim.engine import TRACE_FIELDS, run

from conftest import make_scenario
from oracles import ticks_needed
from randomized import random_suite


def test_null_scenario():
    s = make_scenario(duration_s=10)
    records, report = simulate(s)
    assert len(records) == 10
    for r in records:
        assert r.pv_w == r.grid_import_w == r.inv_ac_w == r.export_w == r.curtail_w == 0
    assert report.bill.total == 0
    assert all(v == 0 for v in report.totals.values())
    assert report.ticks == 10 and report.peak_grid_import_w == 0


def test_constant_offpeak_load_on_low_battery():
    s = make_scenario(load=((0, 100),), duration_s=3600, plant={"initial_soc_wh": 30.0})
    records, report = simulate(s)
    assert all(r.grid_import_w == 100 and r.mode == "GridSupply" for r in records)
    # 100 W for 1 h
    assert report.bill.import_offpeak_kwh == pytest.approx(100 * 3600 / 3.6e6, abs=1e-12)
    assert report.bill.total == pytest.approx(0.1 * 6, abs=1e-12)
    # 100 Wh integrated from 3600 increments of 1/36 Wh; within one pulse
    assert records[-1].import_pulses_cum in (99, 100)


def storyline():
    # peak all day, full battery, a 3 s burst of 210 W inside a 150 W load
    return make_scenario(load=((0, 150), (300, 210), (303, 150)), windows=((0, 86400),),
                         duration_s=600, plant={"initial_soc_wh": 84.0})


def test_storyline_beeps_without_disconnect():
    records, report = simulate(storyline())
    assert {r.mode for r in records} == {"InverterLocal"}
    beeps = [r.t for r in records if "Beep" in r.events]
    assert beeps == [300, 301, 302]
    assert report.event_counts["Beep"] == 3
    assert report.event_counts["Disconnect"] == 0
    assert all(r.v_batt >= 12.0 for r in records)


def test_trace_header_and_rows():
    records, _ = simulate(make_scenario(duration_s=5))
    assert emit_trace([]).decode() == ",".join(TRACE_FIELDS) + "\n"
    assert len(emit_trace(records[:1]).decode().splitlines()) == 2


def test_trace_round_trip():
    records, _ = simulate(storyline())
    back = parse_trace(emit_trace(records))
    assert len(back) == len(records)
    for a, b in zip(records, back):
        for name in TRACE_FIELDS:
            x, y = getattr(a, name), getattr(b, name)
            if isinstance(x, float):
                assert abs(x - y) <= 1e-6
            else:
                assert x == y


def test_report_totals_match_emitted_trace():
    s = random_suite(1, seed=7)[0]
    records, report = simulate(s)
    back = parse_trace(emit_trace(records))
    dt = s.engine.dt_s
    # CSV rounding is at most 5e-7 W per value
    tol = len(back) * 5e-7 * dt / 3.6e6 * 2
    assert report.totals["grid_import"] == pytest.approx(sum(r.grid_import_w for r in back) * dt / 3.6e6, abs=tol)
    assert report.totals["export"] == pytest.approx(sum(r.export_w for r in back) * dt / 3.6e6, abs=tol)
    assert report.totals["curtailed"] == pytest.approx(sum(r.curtail_w for r in back) * dt / 3.6e6, abs=tol)
    assert report.totals["pv_generated"] == pytest.approx(sum(r.pv_w for r in back) * dt / 3.6e6, abs=tol)


def test_report_json_shape():
    _, report = simulate(storyline())
    doc = json.loads(emit_report(report))
    assert list(doc) == ["bill", "totals", "event_counts", "peak_grid_import_w", "ticks", "monthly_bills"]
    assert doc["event_counts"]["Beep"] == 3
    assert doc["ticks"] == 600


def test_null_report_is_zero():
    _, report = simulate(make_scenario(duration_s=10))
    doc = json.loads(emit_report(report))
    assert all(v == 0 for v in doc["bill"].values())
    assert all(v == 0 for v in doc["totals"].values())
    assert doc["peak_grid_import_w"] == 0


def test_monthly_segments():
    day = 86400
    s = make_scenario(load=((0, 80), (10 * day, 120)), windows=((61200, 79200),),
                      dt_s=60, shed_grace_s=60, duration_s=45 * day, plant={"initial_soc_wh": 0.0})
    _, report = simulate(s)
    assert len(report.monthly_bills) == 2
    assert sum(b.total for b in report.monthly_bills) == pytest.approx(report.bill.total, rel=1e-12)


def test_invariant_failure_reports_tick(monkeypatch):
    calls = {"n": 0}
    real = _pykernel.dispatch

    def flaky(*args):
        calls["n"] += 1
        if calls["n"] == 4:
            raise ContractViolation("boom")
        return real(*args)

    monkeypatch.setattr(_pykernel, "dispatch", flaky)
    with pytest.raises(InternalInvariantError) as exc:
        run(make_scenario(duration_s=10), backend="python")
    assert exc.value.tick == 3


def test_unknown_backend():
    with pytest.raises(ValueError):
        run(make_scenario(duration_s=10), backend="fortran")


@pytest.mark.skipif("cython" not in KERNELS, reason="extension not built")
def test_backends_agree_bit_for_bit():
    for s in random_suite(60, seed=11):
        a = run(s, "cython")
        b = run(s, "python")
        np.testing.assert_array_equal(a.fcols, b.fcols)
        np.testing.assert_array_equal(a.icols, b.icols)
        np.testing.assert_array_equal(a.final, b.final)


def test_disconnect_preceded_by_beeps():
    for s in random_suite(100, seed=3):
        records, _ = simulate(s)
        g = ticks_needed(s.engine.shed_grace_s, s.engine.dt_s)
        for k, r in enumerate(records):
            if "Disconnect" in r.events:
                assert k + 1 >= g
                assert all("Beep" in records[j].events for j in range(k - g + 1, k + 1))
