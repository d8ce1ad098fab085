
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hashalloc.difficulty import (
    IDEAL,
    ROLLING_WINDOW,
    BlockRecord,
    RetargetRule,
    is_at_rest,
    next_expected_hashes,
    windowed_mean_block_time,
)
from hashalloc.errors import DomainError


def make_history(n, dt=600.0, work=2.0 ** 40, t0=0.0, start_height=0):
    """Genesis anchor at t0 plus n blocks spaced dt with constant work."""
    records = [BlockRecord(start_height, t0, work)]
    for i in range(1, n + 1):
        records.append(BlockRecord(start_height + i, t0 + i * dt, work))
    return records


ROLLING = RetargetRule(ROLLING_WINDOW, target_time_s=600.0, window_blocks=144)


class TestRollingRule:
    def test_fixed_point_is_exact(self):
        # Work 2^40 and times at exact multiples of 600 are all exactly
        # representable, so the fixed point holds to the last bit.
        history = make_history(144, dt=600.0, work=2.0 ** 40)
        assert next_expected_hashes(ROLLING, history) == 2.0 ** 40

    def test_faster_blocks_raise_work(self):
        history = make_history(144, dt=300.0)
        assert next_expected_hashes(ROLLING, history) == pytest.approx(
            2.0 ** 41, rel=1e-12)

    def test_short_history_uses_what_exists(self):
        history = make_history(10, dt=1200.0, work=1e15)
        # 10 blocks over 12000 s: rate = 10e15/12000, scaled to 600 s.
        assert next_expected_hashes(ROLLING, history) == pytest.approx(
            1e15 / 2, rel=1e-12)

    def test_empty_history_returns_configured_genesis(self):
        rule = RetargetRule(ROLLING_WINDOW, 600.0, 144, genesis_expected_hashes=7e12)
        assert next_expected_hashes(rule, []) == 7e12

    def test_empty_history_without_genesis_raises(self):
        with pytest.raises(DomainError):
            next_expected_hashes(ROLLING, [])

    def test_single_record_carries_forward(self):
        history = [BlockRecord(0, 0.0, 5e14)]
        assert next_expected_hashes(ROLLING, history) == 5e14

    def test_zero_elapsed_carries_forward(self):
        records = [BlockRecord(0, 0.0, 1e15), BlockRecord(1, 0.0, 3e15)]
        assert next_expected_hashes(ROLLING, records) == 3e15

    def test_window_limits_lookback(self):
        rule = RetargetRule(ROLLING_WINDOW, 600.0, 3)
        history = make_history(10, dt=600.0, work=1e12)
        fast_tail = history[:-3] + [
            BlockRecord(h.height, history[-4].timestamp_s + 100.0 * (i + 1),
                        h.expected_hashes)
            for i, h in enumerate(history[-3:])
        ]
        # Only the last 3 blocks (100 s apart) should matter.
        assert next_expected_hashes(rule, fast_tail) == pytest.approx(
            600.0 * 3e12 / 300.0, rel=1e-12)

    def test_rejects_height_gap_in_window(self):
        history = make_history(5)
        history[3] = BlockRecord(99, history[3].timestamp_s,
                                 history[3].expected_hashes)
        with pytest.raises(DomainError):
            next_expected_hashes(ROLLING, history)

    @given(scale=st.floats(min_value=1e-3, max_value=1e3),
           n=st.integers(min_value=2, max_value=160))
    def test_scale_equivariance(self, scale, n):
        base = make_history(n, dt=450.0, work=3e14)
        scaled = [BlockRecord(r.height, r.timestamp_s, r.expected_hashes * scale)
                  for r in base]
        assert next_expected_hashes(ROLLING, scaled) == pytest.approx(
            scale * next_expected_hashes(ROLLING, base), rel=1e-12)

    def test_statistical_convergence_after_rate_doubling(self):
        # Independent single-chain loop: exponential solves at a constant
        # true rate, retarget every block, rate doubles at block zero.
        rule = RetargetRule(ROLLING_WINDOW, 600.0, 72)
        rng = np.random.Generator(np.random.PCG64(42))
        tail_means = []
        for _ in range(10):
            rate = 2e15  # doubled from the 1e15 the history is at rest for
            work = 1e15 * 600.0
            history = make_history(72, dt=600.0, work=work)
            times = []
            for _ in range(4 * 72):
                dt = rng.exponential(work / rate)
                times.append(dt)
                history.append(BlockRecord(history[-1].height + 1,
                                           history[-1].timestamp_s + dt, work))
                work = next_expected_hashes(rule, history)
            tail_means.append(np.mean(times[2 * 72:]))
            assert history[-1].expected_hashes == pytest.approx(
                rate * 600.0, rel=0.3)
        # Seed-averaged bound: per-seed means carry ~8% sampling noise.
        assert abs(np.mean(tail_means) - 600.0) / 600.0 < 0.05


class TestIdealRule:
    IDEAL_RULE = RetargetRule(IDEAL, target_time_s=600.0)

    def test_instant_retarget(self):
        assert next_expected_hashes(self.IDEAL_RULE, [], current_hash_rate=1e18) == 6e20

    def test_requires_rate(self):
        with pytest.raises(DomainError):
            next_expected_hashes(self.IDEAL_RULE, [])

    def test_always_at_rest(self):
        assert is_at_rest(self.IDEAL_RULE, make_history(1), tolerance=0.0)

    def test_at_rest_needs_a_block(self):
        with pytest.raises(DomainError):
            is_at_rest(self.IDEAL_RULE, [], tolerance=0.05)


class TestAtRest:
    def test_on_target(self):
        assert is_at_rest(ROLLING, make_history(144, dt=600.0), 0.05)

    def test_double_time_not_at_rest(self):
        assert not is_at_rest(ROLLING, make_history(144, dt=1200.0), 0.05)

    def test_insufficient_history(self):
        with pytest.raises(DomainError):
            is_at_rest(ROLLING, make_history(100), 0.05)

    def test_windowed_mean(self):
        assert windowed_mean_block_time(ROLLING, make_history(144, dt=450.0)) == \
            pytest.approx(450.0, rel=1e-12)


class TestRecordValidation:
    def test_rejects_nonpositive_work(self):
        with pytest.raises(DomainError):
            BlockRecord(0, 0.0, 0.0)

    def test_rule_validation(self):
        with pytest.raises(DomainError):
            RetargetRule("something_else", 600.0)
        with pytest.raises(DomainError):
            RetargetRule(ROLLING_WINDOW, -1.0)
        with pytest.raises(DomainError):
            RetargetRule(ROLLING_WINDOW, 600.0, window_blocks=0)
