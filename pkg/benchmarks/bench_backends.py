"""Compare the compiled and pure-python simulation kernels.

Run as a script:

    python3 benchmarks/bench_backends.py [--units 200] [--hours 1.0]

Times the thermostat advance kernel and the full dispatch loop on the
same seeded workload for every available backend, and checks that the
backends agree (temperatures to 1e-6 degC, switching exactly).
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from tclfleet import _core
from tclfleet.dispatch import SimFleet, track
from tclfleet.ingest import synth_regulation_trace
from tclfleet.tcl import TclParams

AC = TclParams(thermal_capacitance=2.0, thermal_resistance=2.0,
               rated_power=5.6, cop=2.5, setpoint=22.5, deadband=0.3125,
               load_kind="cooling")


def _build(units: int, seed: int) -> SimFleet:
    rng = np.random.default_rng(seed)
    return SimFleet.homogeneous(AC, units, 32.0, rng)


def _bench_track(backend: str, units: int, hours: float, seed: int):
    _core.set_backend(backend)
    fleet = _build(units, seed)
    batt = fleet.battery()
    sig = synth_regulation_trace(seed, hours=hours)
    u = sig.scale(0.4 * min(batt.charge_limit, batt.discharge_limit))
    start = time.perf_counter()
    result = track(fleet, u)
    elapsed = time.perf_counter() - start
    return elapsed, result


def _bench_advance(backend: str, units: int, hours: float, seed: int):
    _core.set_backend(backend)
    fleet = _build(units, seed)
    steps = int(hours * 900)
    start = time.perf_counter()
    for _ in range(steps):
        fleet.advance(1.0 / 900.0)
    elapsed = time.perf_counter() - start
    return elapsed, fleet.theta.copy(), fleet.mode.copy()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--units", type=int, default=200)
    parser.add_argument("--hours", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    backends = ["pure"]
    try:
        _core.load_backend("compiled")
        backends.append("compiled")
    except Exception:
        print("compiled backend unavailable; timing pure only")

    adv = {}
    trk = {}
    for backend in backends:
        t_adv, theta, mode = _bench_advance(backend, args.units, args.hours,
                                            args.seed)
        t_trk, result = _bench_track(backend, args.units, args.hours,
                                     args.seed)
        adv[backend] = (t_adv, theta, mode)
        trk[backend] = (t_trk, result)
        print(f"{backend:>8}: advance {t_adv * 1e3:8.2f} ms   "
              f"track {t_trk * 1e3:8.2f} ms   "
              f"(violations {result.total_violations}, "
              f"toggles {int(result.step_toggles.sum())})")

    if len(backends) == 2:
        fast, slow = trk["compiled"][0], trk["pure"][0]
        print(f"track speedup: {slow / fast:.1f}x")
        ta, tb = adv["pure"][1], adv["compiled"][1]
        assert np.allclose(ta, tb, atol=1e-6), "advance temperature mismatch"
        assert np.array_equal(adv["pure"][2], adv["compiled"][2]), \
            "advance mode mismatch"
        ra, rb = trk["pure"][1], trk["compiled"][1]
        assert np.array_equal(ra.step_toggles, rb.step_toggles), \
            "track toggle mismatch"
        assert np.allclose(ra.achieved_kw, rb.achieved_kw, atol=1e-6), \
            "track power mismatch"
        print("backends agree")



if __name__ == "__main__":
    main()
