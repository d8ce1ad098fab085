"""Pure-Python engine for the two-chain block-generation event loop.

This is the reference implementation and the fallback when the compiled
kernel is unavailable. The compiled kernel (``_kernel.pyx``) replays the
same floating-point expressions in the same order against the same PCG64
stream, so both engines produce bit-identical traces; tests enforce that
parity. Any change here must be mirrored there.

Event loop, per block event:
  1. race the chains at their current difficulties (exponential solves);
  2. advance the price-ratio walk through each day boundary the new event
     time crossed (one step per simulated day, reflected at the floor);
  3. append the winner's block and retarget its difficulty (rolling rule);
     ideal-rule chains retarget every event from the live rate;
  4. compute the observed per-hash reward of each chain: coinbase value
     over (last realized inter-arrival x difficulty-implied hash rate);
     ideal-rule chains are taken at their target inter-arrival;
  5. apply the population policy step and recompute the equilibrium from
     current prices;
  6. emit the trace row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .miners import EPS_GREEDY, EXTREME_GREEDY, split_after_step

KIND_IDEAL = 0
KIND_ROLLING = 1
POLICY_EPS = 0
POLICY_EXTREME = 1

# One price-walk step per simulated day.
WALK_STEP_S = 86400.0


@dataclass(frozen=True)
class EngineParams:
    """Flattened scenario parameters consumed by both engines."""

    duration_s: float
    ratio0: float
    sigma: float
    price_floor: float
    value_a: float        # coins_a * price_a, constant over a run
    value_b_coef: float   # coins_b * price_a, scaled by the price ratio
    total_rate: float
    t_a: float
    t_b: float
    kind_a: int
    kind_b: int
    window_a: int
    window_b: int
    genesis_a: float
    genesis_b: float
    loyal_a: float
    loyal_b: float
    nonloyal: float
    policy_kind: int
    epsilon: float
    split0: float
    cap_hint: int


def _grow(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape[0] * 2, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


def run_events(params: EngineParams, bit_generator) -> dict[str, np.ndarray]:
    p = params
    rng = np.random.Generator(bit_generator)
    normal = rng.standard_normal
    exponential = rng.standard_exponential
    policy = EPS_GREEDY if p.policy_kind == POLICY_EPS else EXTREME_GREEDY

    cap = p.cap_hint
    time_s = np.empty(cap)
    chain = np.empty(cap, dtype=np.int8)
    height = np.empty(cap, dtype=np.int64)
    expected = np.empty(cap)
    dt_col = np.empty(cap)
    w_a_col = np.empty(cap)
    w_e_col = np.empty(cap)
    ratio_col = np.empty(cap)
    pi_a_col = np.empty(cap)
    pi_b_col = np.empty(cap)

    # Rolling-window state per chain: a work ring holding the trailing
    # window and a timestamp ring one slot longer whose extra slot is the
    # elapsed-time fencepost (seeded by the genesis timestamp 0).
    ts_a = np.zeros(p.window_a + 1)
    ts_b = np.zeros(p.window_b + 1)
    works_a = np.zeros(p.window_a)
    works_b = np.zeros(p.window_b)
    sum_a = 0.0
    sum_b = 0.0
    count_a = 0
    count_b = 0
    e_a = p.genesis_a
    e_b = p.genesis_b
    last_t_a = 0.0
    last_t_b = 0.0
    gap_a = p.t_a
    gap_b = p.t_b

    split = p.split0
    w_a = p.loyal_a + p.nonloyal * split
    w_b = p.loyal_b + p.nonloyal * (1.0 - split)
    t = 0.0
    ratio = p.ratio0
    days_done = 0
    same_t = p.t_a == p.t_b

    i = 0
    while True:
        if w_a > 0.0:
            dt_a = exponential() * e_a / (w_a * p.total_rate)
        else:
            dt_a = math.inf
        if w_b > 0.0:
            dt_b = exponential() * e_b / (w_b * p.total_rate)
        else:
            dt_b = math.inf
        if dt_a <= dt_b:
            winner = 0
            t_new = t + dt_a
        else:
            winner = 1
            t_new = t + dt_b
        if t_new > p.duration_s:
            break
        t = t_new

        if p.sigma > 0.0:
            target_days = int(math.floor(t / WALK_STEP_S))
            while days_done < target_days:
                ratio = ratio + p.sigma * normal()
                if ratio < p.price_floor:
                    ratio = 2.0 * p.price_floor - ratio
                days_done += 1
        v_b = p.value_b_coef * ratio
        rel = p.value_a / (p.value_a + v_b)

        if winner == 0:
            gap_a = t - last_t_a
            last_t_a = t
            mined = e_a
            slot = count_a % p.window_a
            if count_a >= p.window_a:
                sum_a += mined - works_a[slot]
            else:
                sum_a += mined
            works_a[slot] = mined
            count_a += 1
            ts_a[count_a % (p.window_a + 1)] = t
            hgt = count_a
            if p.kind_a == KIND_ROLLING:
                n = count_a if count_a < p.window_a else p.window_a
                elapsed = t - ts_a[(count_a - n) % (p.window_a + 1)]
                if elapsed > 0.0:
                    e_a = sum_a * p.t_a / elapsed
        else:
            gap_b = t - last_t_b
            last_t_b = t
            mined = e_b
            slot = count_b % p.window_b
            if count_b >= p.window_b:
                sum_b += mined - works_b[slot]
            else:
                sum_b += mined
            works_b[slot] = mined
            count_b += 1
            ts_b[count_b % (p.window_b + 1)] = t
            hgt = count_b
            if p.kind_b == KIND_ROLLING:
                n = count_b if count_b < p.window_b else p.window_b
                elapsed = t - ts_b[(count_b - n) % (p.window_b + 1)]
                if elapsed > 0.0:
                    e_b = sum_b * p.t_b / elapsed

        # The ideal rule is at rest by definition, so it retargets both
        # chains from the live rate at every event, not just the winner,
        # and its observed inter-arrival is the target itself.
        if p.kind_a == KIND_IDEAL:
            if w_a > 0.0:
                e_a = w_a * p.total_rate * p.t_a
            obs_dt_a = p.t_a
        else:
            obs_dt_a = gap_a
        if p.kind_b == KIND_IDEAL:
            if w_b > 0.0:
                e_b = w_b * p.total_rate * p.t_b
            obs_dt_b = p.t_b
        else:
            obs_dt_b = gap_b

        # Observed reward per hash: last realized inter-arrival times the
        # difficulty-implied hash rate E/T, i.e. V * T / (dt * E).
        pi_a = p.value_a * p.t_a / (obs_dt_a * e_a)
        pi_b = v_b * p.t_b / (obs_dt_b * e_b)

        split = split_after_step(split, p.nonloyal, policy, p.epsilon, pi_a, pi_b)
        w_a = p.loyal_a + p.nonloyal * split
        w_b = p.loyal_b + p.nonloyal * (1.0 - split)

        if same_t:
            w_e = rel
        else:
            num = p.t_b * rel
            w_e = num / (num + p.t_a * (1.0 - rel))

        if i == cap:
            time_s = _grow(time_s)
            chain = _grow(chain)
            height = _grow(height)
            expected = _grow(expected)
            dt_col = _grow(dt_col)
            w_a_col = _grow(w_a_col)
            w_e_col = _grow(w_e_col)
            ratio_col = _grow(ratio_col)
            pi_a_col = _grow(pi_a_col)
            pi_b_col = _grow(pi_b_col)
            cap = time_s.shape[0]
        time_s[i] = t
        chain[i] = winner
        height[i] = hgt
        expected[i] = mined
        dt_col[i] = gap_a if winner == 0 else gap_b
        w_a_col[i] = w_a
        w_e_col[i] = w_e
        ratio_col[i] = ratio
        pi_a_col[i] = pi_a
        pi_b_col[i] = pi_b
        i += 1

    return {
        "time_s": time_s[:i].copy(),
        "chain": chain[:i].copy(),
        "height": height[:i].copy(),
        "expected_hashes": expected[:i].copy(),
        "dt_s": dt_col[:i].copy(),
        "w_a": w_a_col[:i].copy(),
        "w_e_a": w_e_col[:i].copy(),
        "price_ratio": ratio_col[:i].copy(),
        "pi_a": pi_a_col[:i].copy(),
        "pi_b": pi_b_col[:i].copy(),
    }
