"""Pure-numpy simulation kernels (fallback backend).

Semantics are the contract for both backends: constant-mode segments are
advanced with the closed-form exponential solution; a switching event is
located by bisection on that closed form to within EVENT_TOL_H hours and
the temperature is pinned to the band edge at the event. The compiled
backend in _kernels.pyx must reproduce these trajectories.

State arrays (theta float64, q int8) are modified in place and must be
C-contiguous; parameter arrays are coerced to float64.
"""
from __future__ import annotations

import numpy as np

BACKEND = "pure"

EVENT_TOL_H = 1e-6


def _check_state(theta, q):
    if theta.dtype != np.float64 or not theta.flags.c_contiguous:
        raise TypeError("theta must be a C-contiguous float64 array")
    if q.dtype != np.int8 or not q.flags.c_contiguous:
        raise TypeError("q must be a C-contiguous int8 array")


def _coerce(*arrays):
    return [np.ascontiguousarray(arr, dtype=np.float64) for arr in arrays]


def advance_units(theta, q, a, th_on, th_off, lo, hi, hi_turns_on, dt,
                  max_events=100_000):
    """Advance every unit by dt hours under internal hysteresis control.

    hi_turns_on is True for units whose OFF->ON switch sits at the upper
    band edge (cooling loads); heating loads switch ON at the lower edge.
    Returns (toggles, on_hours) per unit; theta and q are updated in place.
    """
    _check_state(theta, q)
    a, th_on, th_off, lo, hi = _coerce(a, th_on, th_off, lo, hi)
    cool = np.ascontiguousarray(hi_turns_on, dtype=np.uint8).astype(bool)
    n = theta.shape[0]
    toggles = np.zeros(n, dtype=np.int64)
    on_hours = np.zeros(n, dtype=np.float64)
    _advance(theta, q, a, th_on, th_off, lo, hi, cool, float(dt),
             toggles, on_hours, int(max_events))
    return toggles, on_hours


def _advance(theta, q, a, th_on, th_off, lo, hi, cool, dt,
             toggles, on_hours, max_events):
    on = q == 1
    # A unit sitting at (or past) the edge that flips its current mode
    # toggles before the segment starts.
    flip = np.where(
        cool,
        np.where(on, theta <= lo, theta >= hi),
        np.where(on, theta >= hi, theta <= lo),
    )
    if flip.any():
        q[flip] ^= 1
        toggles[flip] += 1

    rem = np.full(theta.shape[0], dt)
    events = 0
    while True:
        idx = np.nonzero(rem > 0.0)[0]
        if idx.size == 0:
            return
        qi = q[idx] == 1
        asym = np.where(qi, th_on[idx], th_off[idx])
        # Edge at which the current mode flips: cooling ON -> lo,
        # cooling OFF -> hi, heating mirrored.
        edge = np.where(qi == cool[idx], lo[idx], hi[idx])
        th0 = theta[idx]
        span = rem[idx]
        th_end = asym + (th0 - asym) * np.exp(-a[idx] * span)
        crossed = (th0 - edge) * (th_end - edge) < 0.0

        done = idx[~crossed]
        theta[done] = th_end[~crossed]
        running = done[q[done] == 1]
        on_hours[running] += rem[running]
        rem[done] = 0.0

        hit = idx[crossed]
        if hit.size == 0:
            continue
        events += 1
        if events > max_events:
            raise FloatingPointError("switching-event cap exceeded")
        a_h = a[hit]
        asym_h = asym[crossed]
        th0_h = th0[crossed]
        edge_h = edge[crossed]
        t_lo = np.zeros(hit.size)
        t_hi = span[crossed].copy()
        start_side = np.sign(th0_h - edge_h)
        while True:
            open_br = t_hi - t_lo > EVENT_TOL_H
            if not open_br.any():
                break
            mid = 0.5 * (t_lo + t_hi)
            val = asym_h + (th0_h - asym_h) * np.exp(-a_h * mid) - edge_h
            same = np.sign(val) == start_side
            t_lo = np.where(open_br & same, mid, t_lo)
            t_hi = np.where(open_br & ~same, mid, t_hi)
        tau = t_hi  # upper end of the bracket: the crossing is consumed
        running = hit[q[hit] == 1]
        on_hours[running] += tau[q[hit] == 1]
        theta[hit] = edge_h
        q[hit] ^= 1
        toggles[hit] += 1
        rem[hit] -= tau


def track_signal(theta, q, a, th_on, th_off, lo, hi, hi_turns_on, pm, po,
                 setpoints, dt, exclusion_tol=1e-9, band_tol=1e-6,
                 max_events=100_000, dwell_steps=0):
    """Priority-stack tracking of a fleet power-deviation signal.

    At each control step the achieved deviation sum(q*pm) - sum(po) is
    steered toward the setpoint by toggling units in eagerness order
    (cooling: hottest first to turn ON, coldest first to turn OFF;
    heating mirrored), walking the stack only while a toggle strictly
    shrinks the error and skipping units pinned at the band edge they
    would violate. A positive dwell_steps additionally locks a unit out
    of commanded toggles for that many steps after its last command
    (internal thermostat flips are never locked out). Thermal states
    then advance by dt with internal hysteresis control still active.

    Returns (achieved, cmd_toggles, violations, unit_toggles, on_hours);
    achieved is recorded after the toggles of each step, violations counts
    units outside the band by more than band_tol after each advance.
    """
    _check_state(theta, q)
    a, th_on, th_off, lo, hi, pm, po = _coerce(a, th_on, th_off, lo, hi, pm, po)
    cool = np.ascontiguousarray(hi_turns_on, dtype=np.uint8).astype(bool)
    setpoints = np.ascontiguousarray(setpoints, dtype=np.float64)
    dt = float(dt)

    n = theta.shape[0]
    n_steps = setpoints.shape[0]
    baseline = float(po.sum())
    width = hi - lo

    achieved = np.empty(n_steps)
    cmd_toggles = np.zeros(n_steps, dtype=np.int64)
    violations = np.zeros(n_steps, dtype=np.int64)
    unit_toggles = np.zeros(n, dtype=np.int64)
    on_hours = np.zeros(n, dtype=np.float64)
    last_cmd = np.full(n, -1, dtype=np.int64)
    dwell_steps = int(dwell_steps)

    for k in range(n_steps):
        err = setpoints[k] - (float(pm[q == 1].sum()) - baseline)
        # Eagerness to be ON; its complement orders the OFF direction.
        eager = np.where(cool, theta - lo, hi - theta) / width
        free = (last_cmd < 0) | (k - last_cmd >= dwell_steps)
        n_cmd = 0
        if err > 0.0:
            allowed = (q == 0) & free & np.where(
                cool, theta > lo + exclusion_tol, theta < hi - exclusion_tol)
            key = np.where(allowed, eager, -np.inf)
            while err > 0.0:
                i = int(np.argmax(key))
                if key[i] == -np.inf or pm[i] >= 2.0 * err:
                    break
                q[i] = 1
                err -= pm[i]
                unit_toggles[i] += 1
                last_cmd[i] = k
                n_cmd += 1
                key[i] = -np.inf
        elif err < 0.0:
            allowed = (q == 1) & free & np.where(
                cool, theta < hi - exclusion_tol, theta > lo + exclusion_tol)
            key = np.where(allowed, -eager, -np.inf)
            while err < 0.0:
                i = int(np.argmax(key))
                if key[i] == -np.inf or pm[i] >= -2.0 * err:
                    break
                q[i] = 0
                err += pm[i]
                unit_toggles[i] += 1
                last_cmd[i] = k
                n_cmd += 1
                key[i] = -np.inf
        achieved[k] = setpoints[k] - err
        cmd_toggles[k] = n_cmd
        _advance(theta, q, a, th_on, th_off, lo, hi, cool, dt,
                 unit_toggles, on_hours, max_events)
        violations[k] = int(np.count_nonzero(
            (theta < lo - band_tol) | (theta > hi + band_tol)))

    return achieved, cmd_toggles, violations, unit_toggles, on_hours
