import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radar_egovel import (
    EstimateStatus,
    NonMonotonicTimestamp,
    RadarScan,
    VelocityEstimate,
    detect_zero_velocity,
)
from radar_egovel.gating import (
    Combination,
    Decision,
    FilterConfig,
    FilterState,
    ZeroVelocityConfig,
    filter_step,
)

DIRS = np.tile(np.eye(3), (34, 1))[:100] * 5


def scan_with(dopplers):
    d = np.asarray(dopplers, dtype=float)
    return RadarScan.from_arrays(0.0, DIRS[: len(d)], d)


def est(t, v, status=EstimateStatus.ESTIMATED):
    return VelocityEstimate(t, v, status, 10, 10, 0.0)


def warm_state(n=5, speed=1.0, rate=10.0):
    state = FilterState()
    cfg = FilterConfig()
    for i in range(n):
        _, state = filter_step(state, cfg, est(i / rate, (speed, 0, 0)))
    return state


def test_zero_velocity_all_small():
    assert detect_zero_velocity(scan_with([0.01] * 20))


def test_zero_velocity_too_many_exceed():
    assert not detect_zero_velocity(scan_with([0.01] * 70 + [2.0] * 30))


def test_zero_velocity_within_fraction():
    assert detect_zero_velocity(scan_with([0.01] * 80 + [2.0] * 20))


def test_zero_velocity_boundaries():
    assert not detect_zero_velocity(scan_with([0.05] * 20))
    assert detect_zero_velocity(scan_with([0.01] * 75 + [1.0] * 25))
    assert not detect_zero_velocity(scan_with([0.01] * 4))
    assert not detect_zero_velocity(RadarScan(0.0, ()))
    assert not detect_zero_velocity(scan_with([-1.0] * 20))


@pytest.mark.parametrize("mode", list(Combination))
def test_reject_large_jump(mode):
    cfg = FilterConfig(combination=mode)
    dec, _ = filter_step(warm_state(), cfg, est(0.5, (10.0, 0, 0)))
    assert dec is Decision.REJECT


def test_accept_feasible():
    # a norm-2 candidate is at least 1 m/s from a norm-1 predecessor, so the
    # nearest realizable case is norm 1.9 with a 0.9 m/s step (9 m/s^2)
    dec, new = filter_step(warm_state(), FilterConfig(), est(0.5, (1.9, 0, 0)))
    assert dec is Decision.ACCEPT
    assert len(new.window) == 6


def test_acceleration_at_threshold_rejects():
    dec, _ = filter_step(warm_state(), FilterConfig(), est(0.5, (2.0, 0, 0)))
    assert dec is Decision.REJECT


def test_acceleration_equality_rejects():
    state = warm_state()
    dec, _ = filter_step(state, FilterConfig(), est(0.5, (1.0, 1.0, 0.0)))
    assert dec is Decision.REJECT


def test_empty_window_accepts_anything():
    dec, state = filter_step(FilterState(), FilterConfig(), est(0.0, (1e6, -1e6, 3.0)))
    assert dec is Decision.ACCEPT and len(state.window) == 1


def test_warmup_uses_acceleration_only():
    state = warm_state(n=2)
    # norm jump of 8 would fail the norm check, but at 1 Hz spacing accel is below 10
    dec, _ = filter_step(state, FilterConfig(), est(1.1, (9.0, 0, 0)))
    assert dec is Decision.ACCEPT
    dec, _ = filter_step(state, FilterConfig(), est(0.2, (9.0, 0, 0)))
    assert dec is Decision.REJECT


def test_combination_modes_differ():
    # A fails (norm 1 -> 9.5), B passes (slow sampling)
    state = warm_state()
    cand = est(2.0, (9.5, 0, 0))
    assert filter_step(state, FilterConfig(), cand)[0] is Decision.REJECT
    assert filter_step(state, FilterConfig(combination="require_both"), cand)[0] is Decision.ACCEPT


def test_zero_velocity_always_accepted():
    state = warm_state(speed=9.0)
    dec, new = filter_step(state, FilterConfig(), est(0.5, (0, 0, 0), EstimateStatus.ZERO_VELOCITY))
    assert dec is Decision.ACCEPT
    assert np.array_equal(new.window[-1][1], np.zeros(3))


def test_non_monotonic_timestamp():
    state = warm_state()
    with pytest.raises(NonMonotonicTimestamp):
        filter_step(state, FilterConfig(), est(0.4, (1, 0, 0)))


def test_rejects_invalid_status():
    with pytest.raises(ValueError):
        filter_step(FilterState(), FilterConfig(), VelocityEstimate(0.0, (0, 0, 0), EstimateStatus.DEGENERATE, 0, 3))


speeds = st.lists(st.floats(0, 30, allow_nan=False), min_size=1, max_size=60)


@settings(max_examples=100, deadline=None)
@given(speeds, st.integers(1, 8))
def test_window_length_bound(xs, n):
    cfg = FilterConfig(window_size=n)
    state = FilterState()
    accepted = 0
    for i, x in enumerate(xs):
        dec, state = filter_step(state, cfg, est(0.1 * (i + 1), (x, 0, 0)))
        accepted += dec is Decision.ACCEPT
        assert len(state.window) <= n + 1
        assert len(state.window) == min(accepted, n + 1)
        ts = [t for t, _ in state.window]
        assert all(a < b for a, b in zip(ts, ts[1:]))


@settings(max_examples=100, deadline=None)
@given(speeds)
def test_rejection_is_idempotent_and_replay_deterministic(xs):
    cfg = FilterConfig()

    def run():
        state, out = FilterState(), []
        for i, x in enumerate(xs):
            dec, new = filter_step(state, cfg, est(0.1 * (i + 1), (x, 0, 0)))
            if dec is Decision.REJECT:
                assert new is state
            state = new
            out.append(dec)
        return out

    assert run() == run()


def test_three_wild_estimates_rejected():
    rng = np.random.default_rng(0)
    wild = {100, 300, 500}
    state, rejected = FilterState(), []
    for k in range(789):
        t = k / 10
        v = np.array([5 + 2 * np.sin(0.3 * t), np.cos(0.2 * t), 0.0]) + rng.normal(0, 0.02, 3)
        if k in wild:
            v = v + [10.0, 0, 0]
        dec, state = filter_step(state, FilterConfig(), est(t, v))
        if dec is Decision.REJECT:
            rejected.append(k)
    assert rejected == sorted(wild)


def test_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(window_size=0)
    with pytest.raises(ValueError):
        ZeroVelocityConfig(max_exceed_fraction=1.5)
