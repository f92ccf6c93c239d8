# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Mirrors pure.py: closed-form exponential segments, switching events
located by bisection to EVENT_TOL_H hours with the temperature pinned to
the band edge at the event. Keep the two implementations in lockstep.
"""
import numpy as np

from libc.math cimport exp, INFINITY

BACKEND = "compiled"

cdef double EVENT_TOL_H = 1e-6


cdef inline double _seg(double asym, double th0, double a, double t) noexcept nogil:
    return asym + (th0 - asym) * exp(-a * t)


cdef int _advance_one(double* theta, signed char* q, double a, double th_on,
                      double th_off, double lo, double hi, bint cool,
                      double dt, long* toggles, double* on_hours,
                      long max_events) noexcept nogil:
    cdef double th = theta[0]
    cdef signed char mode = q[0]
    cdef bint flip
    cdef double rem, asym, edge, th_end, t_lo, t_hi, mid, val, tau
    cdef bint start_above, same
    cdef long events = 0

    if cool:
        flip = (th <= lo) if mode == 1 else (th >= hi)
    else:
        flip = (th >= hi) if mode == 1 else (th <= lo)
    if flip:
        mode = mode ^ 1
        toggles[0] += 1

    rem = dt
    while rem > 0.0:
        asym = th_on if mode == 1 else th_off
        if (mode == 1) == cool:
            edge = lo
        else:
            edge = hi
        th_end = _seg(asym, th, a, rem)
        if (th - edge) * (th_end - edge) < 0.0:
            events += 1
            if events > max_events:
                theta[0] = th
                q[0] = mode
                return -1
            t_lo = 0.0
            t_hi = rem
            start_above = th > edge
            while t_hi - t_lo > EVENT_TOL_H:
                mid = 0.5 * (t_lo + t_hi)
                val = _seg(asym, th, a, mid) - edge
                if val > 0.0:
                    same = start_above
                elif val < 0.0:
                    same = not start_above
                else:
                    same = False
                if same:
                    t_lo = mid
                else:
                    t_hi = mid
            tau = t_hi
            if mode == 1:
                on_hours[0] += tau
            th = edge
            mode = mode ^ 1
            toggles[0] += 1
            rem -= tau
        else:
            if mode == 1:
                on_hours[0] += rem
            th = th_end
            rem = 0.0
    theta[0] = th
    q[0] = mode
    return 0


def _check_state(theta, q):
    if theta.dtype != np.float64 or not theta.flags.c_contiguous:
        raise TypeError("theta must be a C-contiguous float64 array")
    if q.dtype != np.int8 or not q.flags.c_contiguous:
        raise TypeError("q must be a C-contiguous int8 array")


def advance_units(theta, q, a, th_on, th_off, lo, hi, hi_turns_on, double dt,
                  long max_events=100_000):
    """Advance every unit by dt hours under internal hysteresis control.

    Same contract as the pure backend: theta and q update in place and
    (toggles, on_hours) per-unit arrays come back.
    """
    _check_state(theta, q)
    cdef double[::1] th_v = theta
    cdef signed char[::1] q_v = q
    cdef double[::1] a_v = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] on_v = np.ascontiguousarray(th_on, dtype=np.float64)
    cdef double[::1] off_v = np.ascontiguousarray(th_off, dtype=np.float64)
    cdef double[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[::1] hi_v = np.ascontiguousarray(hi, dtype=np.float64)
    cdef unsigned char[::1] cool_v = np.ascontiguousarray(
        hi_turns_on, dtype=np.uint8)

    cdef Py_ssize_t n = th_v.shape[0]
    toggles = np.zeros(n, dtype=np.int64)
    on_hours = np.zeros(n, dtype=np.float64)
    cdef long[::1] tog_v = toggles
    cdef double[::1] hrs_v = on_hours
    cdef Py_ssize_t i
    cdef int bad = 0
    with nogil:
        for i in range(n):
            if _advance_one(&th_v[i], &q_v[i], a_v[i], on_v[i], off_v[i],
                            lo_v[i], hi_v[i], cool_v[i] != 0, dt,
                            &tog_v[i], &hrs_v[i], max_events) != 0:
                bad = 1
                break
    if bad:
        raise FloatingPointError("switching-event cap exceeded")
    return toggles, on_hours


def track_signal(theta, q, a, th_on, th_off, lo, hi, hi_turns_on, pm, po,
                 setpoints, double dt, double exclusion_tol=1e-9,
                 double band_tol=1e-6, long max_events=100_000,
                 long dwell_steps=0):
    """Priority-stack tracking loop; see the pure backend docstring."""
    _check_state(theta, q)
    cdef double[::1] th_v = theta
    cdef signed char[::1] q_v = q
    cdef double[::1] a_v = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] on_v = np.ascontiguousarray(th_on, dtype=np.float64)
    cdef double[::1] off_v = np.ascontiguousarray(th_off, dtype=np.float64)
    cdef double[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[::1] hi_v = np.ascontiguousarray(hi, dtype=np.float64)
    cdef unsigned char[::1] cool_v = np.ascontiguousarray(
        hi_turns_on, dtype=np.uint8)
    cdef double[::1] pm_v = np.ascontiguousarray(pm, dtype=np.float64)
    cdef double[::1] po_v = np.ascontiguousarray(po, dtype=np.float64)
    cdef double[::1] sp_v = np.ascontiguousarray(setpoints, dtype=np.float64)

    cdef Py_ssize_t n = th_v.shape[0]
    cdef Py_ssize_t n_steps = sp_v.shape[0]
    achieved = np.empty(n_steps, dtype=np.float64)
    cmd_toggles = np.zeros(n_steps, dtype=np.int64)
    violations = np.zeros(n_steps, dtype=np.int64)
    unit_toggles = np.zeros(n, dtype=np.int64)
    on_hours = np.zeros(n, dtype=np.float64)
    cdef double[::1] ach_v = achieved
    cdef long[::1] cmd_v = cmd_toggles
    cdef long[::1] vio_v = violations
    cdef long[::1] tog_v = unit_toggles
    cdef double[::1] hrs_v = on_hours
    last_cmd = np.full(n, -1, dtype=np.int64)
    cdef long[::1] lc_v = last_cmd

    cdef double baseline = 0.0
    cdef Py_ssize_t i, k, best
    cdef double err, cur, best_key, keyv, width
    cdef long ncmd, nv
    cdef int bad = 0

    for i in range(n):
        baseline += po_v[i]

    with nogil:
        for k in range(n_steps):
            cur = 0.0
            for i in range(n):
                if q_v[i] == 1:
                    cur += pm_v[i]
            err = sp_v[k] - (cur - baseline)
            ncmd = 0
            if err > 0.0:
                while err > 0.0:
                    best = -1
                    best_key = -INFINITY
                    for i in range(n):
                        if q_v[i] != 0:
                            continue
                        if lc_v[i] >= 0 and k - lc_v[i] < dwell_steps:
                            continue
                        width = hi_v[i] - lo_v[i]
                        if cool_v[i]:
                            if th_v[i] <= lo_v[i] + exclusion_tol:
                                continue
                            keyv = (th_v[i] - lo_v[i]) / width
                        else:
                            if th_v[i] >= hi_v[i] - exclusion_tol:
                                continue
                            keyv = (hi_v[i] - th_v[i]) / width
                        if keyv > best_key:
                            best_key = keyv
                            best = i
                    if best < 0 or pm_v[best] >= 2.0 * err:
                        break
                    q_v[best] = 1
                    err -= pm_v[best]
                    tog_v[best] += 1
                    lc_v[best] = k
                    ncmd += 1
            elif err < 0.0:
                while err < 0.0:
                    best = -1
                    best_key = -INFINITY
                    for i in range(n):
                        if q_v[i] != 1:
                            continue
                        if lc_v[i] >= 0 and k - lc_v[i] < dwell_steps:
                            continue
                        width = hi_v[i] - lo_v[i]
                        if cool_v[i]:
                            if th_v[i] >= hi_v[i] - exclusion_tol:
                                continue
                            keyv = -(th_v[i] - lo_v[i]) / width
                        else:
                            if th_v[i] <= lo_v[i] + exclusion_tol:
                                continue
                            keyv = -(hi_v[i] - th_v[i]) / width
                        if keyv > best_key:
                            best_key = keyv
                            best = i
                    if best < 0 or pm_v[best] >= -2.0 * err:
                        break
                    q_v[best] = 0
                    err += pm_v[best]
                    tog_v[best] += 1
                    lc_v[best] = k
                    ncmd += 1
            ach_v[k] = sp_v[k] - err
            cmd_v[k] = ncmd
            for i in range(n):
                if _advance_one(&th_v[i], &q_v[i], a_v[i], on_v[i], off_v[i],
                                lo_v[i], hi_v[i], cool_v[i] != 0, dt,
                                &tog_v[i], &hrs_v[i], max_events) != 0:
                    bad = 1
                    break
            if bad:
                break
            nv = 0
            for i in range(n):
                if th_v[i] < lo_v[i] - band_tol or th_v[i] > hi_v[i] + band_tol:
                    nv += 1
            vio_v[k] = nv
    if bad:
        raise FloatingPointError("switching-event cap exceeded")
    return achieved, cmd_toggles, violations, unit_toggles, on_hours
