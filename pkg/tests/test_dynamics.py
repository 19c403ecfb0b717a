import math

import numpy as np
import pytest

from analysis import prime_period_two
from dynamics import (
    LimitKind, Trend, classify_limit, envelope, settle, simulate, step, subsequence_trend,
)
from errors import DomainError, ParameterError
from params import NormParams, Params33, to_pqr_l


def test_step_and_domain_error():
    norm = NormParams.three_two(3, 1, 2)
    assert step(norm, 1, 1) == pytest.approx(3.0)
    with pytest.raises(DomainError) as e:
        step(norm, 0, 0, index=5)
    assert e.value.index == 5


def test_equilibrium_is_fixed():
    norm = NormParams.three_two(3, 1, 2)
    y_bar = norm.equilibrium
    assert abs(step(norm, y_bar, y_bar) - y_bar) < 1e-12


def test_simulate_constant_orbit():
    orbit = simulate(NormParams.three_two(1, 1, 0), 1.0, 1.0, 5)
    assert orbit.length == 7
    assert np.all(orbit.samples == 1.0)


def test_simulate_rejects_nonpositive_start():
    with pytest.raises(DomainError):
        simulate(NormParams.three_two(3, 1, 2), 0.0, 1.0, 5)


def test_simulate_rejects_start_below_L():
    norm, _ = to_pqr_l(Params33(1, 1, 1, 1, 1, 1))
    with pytest.raises(DomainError):
        simulate(norm, 0.1, 1.0, 5)


def test_simulate_keeps_tail_past_cap():
    orbit = simulate(NormParams.three_two(3, 1, 2), 1.0, 2.0, 500, cap=100, keep=16)
    assert orbit.truncated
    assert len(orbit.samples) == 100
    values, base = orbit.recent()
    assert len(values) == 16
    assert base == orbit.length - 16


def test_envelope_examples():
    env = envelope(NormParams.three_two(3, 1, 2))
    assert (env.lo, env.hi) == pytest.approx((1.0, 3.0))
    env = envelope(NormParams.three_two(1, 1, 0))
    assert (env.lo, env.hi) == pytest.approx((1.0, 1.0))


def test_envelope_of_all_ones_is_a_point():
    norm, _ = to_pqr_l(Params33(1, 1, 1, 1, 1, 1))
    env = envelope(norm)
    assert env.lo == pytest.approx(1.0)
    assert env.hi == pytest.approx(1.0)


def test_envelope_needs_origin_for_three_two_l():
    with pytest.raises(ParameterError):
        envelope(NormParams.three_two_l(2, 1, 1, 0.5))


def test_orbits_enter_the_envelope():
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([3])))
    for _ in range(1000):
        p, q, r = gen.uniform(0.05, 10, size=3)
        norm = NormParams.three_two(p, q, r)
        env = envelope(norm)
        x_minus1, x_0 = 10.0 ** gen.uniform(-3, 3, size=2)
        samples = simulate(norm, x_minus1, x_0, 30).samples
        # the lower bound holds from x_1, the upper bound once both predecessors are above it
        assert np.all(samples[2:] >= env.lo - 1e-12)
        assert np.all(samples[4:] <= env.hi + 1e-12)


def test_upper_bound_can_fail_before_index_four():
    norm = NormParams.three_two(1, 1, 10)
    env = envelope(norm)
    samples = simulate(norm, 1e6, 1e-6, 3).samples
    assert samples[3] > env.hi


def test_envelope_is_invariant():
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([5])))
    for _ in range(100):
        p, q, r = gen.uniform(0.05, 10, size=3)
        norm = NormParams.three_two(p, q, r)
        env = envelope(norm)
        xs = gen.uniform(env.lo, env.hi, size=(100, 2))
        for x, y in xs:
            assert env.contains(step(norm, x, y), slack=1e-12)


def test_classify_constant_orbit_at_equilibrium():
    orbit = simulate(NormParams.three_two(1, 1, 0), 1.0, 1.0, 100)
    limit = classify_limit(orbit)
    assert limit.kind == LimitKind.EQUILIBRIUM
    assert limit.witness_index == 0


def test_classify_converging_orbit():
    norm = NormParams.three_two(3, 1, 2)
    limit = classify_limit(simulate(norm, 1.0, 1.0, 100_000), tol=1e-9)
    assert limit.kind == LimitKind.EQUILIBRIUM
    assert limit.residual < 1e-9
    assert norm.equilibrium == pytest.approx(1 + math.sqrt(2))


def test_classify_two_cycle():
    p, q, r = 0.1, 10.0, 0.5
    cycle = prime_period_two(p, q, r)
    norm = NormParams.three_two(p, q, r)
    orbit = simulate(norm, cycle.m, cycle.M, 8)
    limit = classify_limit(orbit, tol=1e-8, window=6)
    assert limit.kind == LimitKind.PERIOD_TWO
    assert limit.lo == pytest.approx(cycle.m, abs=1e-9)
    assert limit.hi == pytest.approx(cycle.M, abs=1e-9)
    assert limit.to_dict()['lo'] == limit.lo


def test_classify_needs_long_enough_orbit():
    orbit = simulate(NormParams.three_two(3, 1, 2), 1.0, 1.0, 10)
    with pytest.raises(ParameterError):
        classify_limit(orbit, window=64)


def test_classify_undetermined_orbit():
    orbit = simulate(NormParams.three_two(3, 1, 2), 1.0, 100.0, 10)
    limit = classify_limit(orbit, window=4)
    assert limit.kind == LimitKind.UNDETERMINED
    assert limit.witness_index == -1


def test_subsequence_trend_of_constant_orbit():
    orbit = simulate(NormParams.three_two(1, 1, 0), 1.0, 1.0, 20)
    assert subsequence_trend(orbit, burn_in=0) == {'even': Trend.INCREASING, 'odd': Trend.INCREASING}


def test_subsequence_trend_needs_six_samples():
    with pytest.raises(ParameterError):
        subsequence_trend(simulate(NormParams.three_two(1, 1, 0), 1.0, 1.0, 2))


def test_settle_reaches_equilibrium():
    limit, steps = settle(NormParams.three_two(3, 1, 2), 0.5, 7.0)
    assert limit.kind == LimitKind.EQUILIBRIUM
    assert steps <= 4096


def test_settle_respects_step_cap():
    limit, steps = settle(NormParams.three_two(3, 1, 2), 0.5, 7.0, step_cap=10, window=4)
    assert steps == 10


@pytest.mark.slow
def test_random_orbits_settle_within_cap():
    norm = NormParams.three_two(9, 0.5, 2)
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([6])))
    for _ in range(50):
        x_minus1, x_0 = 10.0 ** gen.uniform(-2.0, 2.0, size=2)
        limit, steps = settle(norm, float(x_minus1), float(x_0), step_cap=1_000_000)
        assert limit.kind in (LimitKind.EQUILIBRIUM, LimitKind.PERIOD_TWO), (x_minus1, x_0, steps)
        assert steps <= 1_000_000
