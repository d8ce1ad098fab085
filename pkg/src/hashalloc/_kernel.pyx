#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled engine for the two-chain block-generation event loop.

Line-for-line port of ``_engine_py.run_events``: the same floating-point
expressions in the same order, drawing from the same PCG64 stream through
numpy's C distribution functions, so traces are bit-identical with the
pure-Python engine (tests enforce this). Any change must be mirrored in
``_engine_py.py``.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, fabs, floor, isinf
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_exponential,
    random_standard_normal,
)

cnp.import_array()

DEF KIND_IDEAL = 0
DEF KIND_ROLLING = 1
DEF POLICY_EXTREME = 1
DEF TIE_TOL = 1e-12
DEF WALK_STEP_S = 86400.0


cdef inline bint _tied(double a, double b) noexcept nogil:
    if isinf(a) or isinf(b):
        return False
    cdef double fa = fabs(a)
    cdef double fb = fabs(b)
    return fabs(a - b) <= TIE_TOL * (fa if fa > fb else fb)


def run_events(params, bit_generator):
    cdef double duration_s = params.duration_s
    cdef double ratio = params.ratio0
    cdef double sigma = params.sigma
    cdef double price_floor = params.price_floor
    cdef double value_a = params.value_a
    cdef double value_b_coef = params.value_b_coef
    cdef double total_rate = params.total_rate
    cdef double t_a = params.t_a
    cdef double t_b = params.t_b
    cdef int kind_a = params.kind_a
    cdef int kind_b = params.kind_b
    cdef Py_ssize_t window_a = params.window_a
    cdef Py_ssize_t window_b = params.window_b
    cdef double loyal_a = params.loyal_a
    cdef double loyal_b = params.loyal_b
    cdef double nonloyal = params.nonloyal
    cdef int policy_kind = params.policy_kind
    cdef double epsilon = params.epsilon
    cdef double split = params.split0
    cdef Py_ssize_t cap = params.cap_hint

    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator")

    time_np = np.empty(cap)
    chain_np = np.empty(cap, dtype=np.int8)
    height_np = np.empty(cap, dtype=np.int64)
    expected_np = np.empty(cap)
    dt_np = np.empty(cap)
    w_a_np = np.empty(cap)
    w_e_np = np.empty(cap)
    ratio_np = np.empty(cap)
    pi_a_np = np.empty(cap)
    pi_b_np = np.empty(cap)
    cdef double[::1] time_v = time_np
    cdef signed char[::1] chain_v = chain_np
    cdef cnp.int64_t[::1] height_v = height_np
    cdef double[::1] expected_v = expected_np
    cdef double[::1] dt_v = dt_np
    cdef double[::1] w_a_v = w_a_np
    cdef double[::1] w_e_v = w_e_np
    cdef double[::1] ratio_v = ratio_np
    cdef double[::1] pi_a_v = pi_a_np
    cdef double[::1] pi_b_v = pi_b_np

    ts_a_np = np.zeros(window_a + 1)
    ts_b_np = np.zeros(window_b + 1)
    works_a_np = np.zeros(window_a)
    works_b_np = np.zeros(window_b)
    cdef double[::1] ts_a = ts_a_np
    cdef double[::1] ts_b = ts_b_np
    cdef double[::1] works_a = works_a_np
    cdef double[::1] works_b = works_b_np

    cdef double sum_a = 0.0
    cdef double sum_b = 0.0
    cdef Py_ssize_t count_a = 0
    cdef Py_ssize_t count_b = 0
    cdef double e_a = params.genesis_a
    cdef double e_b = params.genesis_b
    cdef double last_t_a = 0.0
    cdef double last_t_b = 0.0
    cdef double gap_a = t_a
    cdef double gap_b = t_b
    cdef double w_a = loyal_a + nonloyal * split
    cdef double w_b = loyal_b + nonloyal * (1.0 - split)
    cdef double t = 0.0
    cdef cnp.int64_t days_done = 0
    cdef bint same_t = t_a == t_b

    cdef Py_ssize_t i = 0
    cdef Py_ssize_t slot, n
    cdef cnp.int64_t target_days, hgt
    cdef int winner, choice
    cdef double dt_a, dt_b, t_new, v_b, rel, mined, elapsed
    cdef double obs_dt_a, obs_dt_b, pi_a, pi_b, w_e, num, shift, moved, dt_block

    with bit_generator.lock:
        while True:
            if w_a > 0.0:
                dt_a = random_standard_exponential(rng) * e_a / (w_a * total_rate)
            else:
                dt_a = INFINITY
            if w_b > 0.0:
                dt_b = random_standard_exponential(rng) * e_b / (w_b * total_rate)
            else:
                dt_b = INFINITY
            if dt_a <= dt_b:
                winner = 0
                t_new = t + dt_a
            else:
                winner = 1
                t_new = t + dt_b
            if t_new > duration_s:
                break
            t = t_new

            if sigma > 0.0:
                target_days = <cnp.int64_t> floor(t / WALK_STEP_S)
                while days_done < target_days:
                    ratio = ratio + sigma * random_standard_normal(rng)
                    if ratio < price_floor:
                        ratio = 2.0 * price_floor - ratio
                    days_done += 1
            v_b = value_b_coef * ratio
            rel = value_a / (value_a + v_b)

            if winner == 0:
                gap_a = t - last_t_a
                last_t_a = t
                mined = e_a
                slot = count_a % window_a
                if count_a >= window_a:
                    sum_a += mined - works_a[slot]
                else:
                    sum_a += mined
                works_a[slot] = mined
                count_a += 1
                ts_a[count_a % (window_a + 1)] = t
                hgt = count_a
                if kind_a == KIND_ROLLING:
                    n = count_a if count_a < window_a else window_a
                    elapsed = t - ts_a[(count_a - n) % (window_a + 1)]
                    if elapsed > 0.0:
                        e_a = sum_a * t_a / elapsed
            else:
                gap_b = t - last_t_b
                last_t_b = t
                mined = e_b
                slot = count_b % window_b
                if count_b >= window_b:
                    sum_b += mined - works_b[slot]
                else:
                    sum_b += mined
                works_b[slot] = mined
                count_b += 1
                ts_b[count_b % (window_b + 1)] = t
                hgt = count_b
                if kind_b == KIND_ROLLING:
                    n = count_b if count_b < window_b else window_b
                    elapsed = t - ts_b[(count_b - n) % (window_b + 1)]
                    if elapsed > 0.0:
                        e_b = sum_b * t_b / elapsed

            if kind_a == KIND_IDEAL:
                if w_a > 0.0:
                    e_a = w_a * total_rate * t_a
                obs_dt_a = t_a
            else:
                obs_dt_a = gap_a
            if kind_b == KIND_IDEAL:
                if w_b > 0.0:
                    e_b = w_b * total_rate * t_b
                obs_dt_b = t_b
            else:
                obs_dt_b = gap_b

            pi_a = value_a * t_a / (obs_dt_a * e_a)
            pi_b = v_b * t_b / (obs_dt_b * e_b)

            # Mirrors miners.split_after_step.
            choice = 0
            if pi_a > pi_b:
                if not _tied(pi_a, pi_b):
                    choice = 1
            elif pi_b > pi_a:
                if not _tied(pi_a, pi_b):
                    choice = -1
            if choice != 0:
                if policy_kind == POLICY_EXTREME:
                    split = 1.0 if choice > 0 else 0.0
                elif nonloyal > 0.0:
                    shift = 0.5 * epsilon / nonloyal
                    if choice > 0:
                        moved = split + shift
                        split = 1.0 if moved > 1.0 else moved
                    else:
                        moved = split - shift
                        split = 0.0 if moved < 0.0 else moved
            w_a = loyal_a + nonloyal * split
            w_b = loyal_b + nonloyal * (1.0 - split)

            if same_t:
                w_e = rel
            else:
                num = t_b * rel
                w_e = num / (num + t_a * (1.0 - rel))

            if i == cap:
                cap = cap * 2
                time_np = _grown(time_np, cap)
                chain_np = _grown(chain_np, cap)
                height_np = _grown(height_np, cap)
                expected_np = _grown(expected_np, cap)
                dt_np = _grown(dt_np, cap)
                w_a_np = _grown(w_a_np, cap)
                w_e_np = _grown(w_e_np, cap)
                ratio_np = _grown(ratio_np, cap)
                pi_a_np = _grown(pi_a_np, cap)
                pi_b_np = _grown(pi_b_np, cap)
                time_v = time_np
                chain_v = chain_np
                height_v = height_np
                expected_v = expected_np
                dt_v = dt_np
                w_a_v = w_a_np
                w_e_v = w_e_np
                ratio_v = ratio_np
                pi_a_v = pi_a_np
                pi_b_v = pi_b_np
            time_v[i] = t
            chain_v[i] = winner
            height_v[i] = hgt
            expected_v[i] = mined
            dt_v[i] = gap_a if winner == 0 else gap_b
            w_a_v[i] = w_a
            w_e_v[i] = w_e
            ratio_v[i] = ratio
            pi_a_v[i] = pi_a
            pi_b_v[i] = pi_b
            i += 1

    return {
        "time_s": time_np[:i].copy(),
        "chain": chain_np[:i].copy(),
        "height": height_np[:i].copy(),
        "expected_hashes": expected_np[:i].copy(),
        "dt_s": dt_np[:i].copy(),
        "w_a": w_a_np[:i].copy(),
        "w_e_a": w_e_np[:i].copy(),
        "price_ratio": ratio_np[:i].copy(),
        "pi_a": pi_a_np[:i].copy(),
        "pi_b": pi_b_np[:i].copy(),
    }


def _grown(arr, Py_ssize_t cap):
    out = np.empty(cap, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out
