"""Time the compiled and pure-Python tick loops on the same 24 h scenario.

    python benchmarks/bench_kernels.py [scenario.json] [--repeat N]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from smartgrid_sim import emit_report, emit_trace, load_scenario_file
from smartgrid_sim._core import KERNELS
from smartgrid_sim.engine import build_report, run, trace_records

DEFAULT = Path(__file__).resolve().parent.parent / "scenarios" / "day.json"


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("scenario", nargs="?", default=str(DEFAULT))
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    scenario = load_scenario_file(args.scenario)
    n = scenario.engine.n_ticks

    results = {}
    for name in KERNELS:
        loop = best_of(lambda: run(scenario, name), args.repeat)

        def pipeline():
            res = run(scenario, name)
            emit_trace(trace_records(res))
            emit_report(build_report(res))

        full = best_of(pipeline, args.repeat)
        results[name] = run(scenario, name)
        print(f"{name:>7}: tick loop {loop * 1e3:9.1f} ms ({loop / n * 1e6:6.2f} us/tick)   "
              f"loop+trace+report {full * 1e3:9.1f} ms")

    if len(results) == 2:
        a, b = results["cython"], results["python"]
        same = (np.array_equal(a.fcols, b.fcols) and np.array_equal(a.icols, b.icols)
                and np.array_equal(a.final, b.final))
        print(f"outputs identical: {same}")


if __name__ == "__main__":
    main()
