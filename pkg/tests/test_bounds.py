import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jamming_bandits.analytic import HolderParams
from jamming_bandits.bounds import (
    BoundInputs, InfeasiblePlanError, cumulative_confidence, estimate_delta, estimate_failure_probability,
    one_step_delta, one_step_failure_probability, plan_budget, regret_curve, suboptimality_audit,
)
from jamming_bandits.policies import UCB1

ONE = HolderParams(1.0)


def test_regret_curve_shape():
    b = BoundInputs(1000, ONE, n_mod=3)
    assert regret_curve(b, 1000) == pytest.approx(3 * 1000**0.75 * math.log(1000) ** 0.25)
    t = np.array([2**16, 2**17], dtype=float)
    v = regret_curve(b, t)
    assert v[1] / v[0] == pytest.approx(2**0.75 * (17 / 16) ** 0.25)
    avg = regret_curve(b, np.geomspace(10, 1e9, 30)) / np.geomspace(10, 1e9, 30)
    assert np.all(np.diff(avg) < 0)
    with pytest.raises(ValueError):
        regret_curve(b, 1)


def test_one_step_delta():
    assert one_step_delta(65536, ONE) == pytest.approx(2 * 2**1.25 * (math.log(65536) / 65536) ** 0.25)
    assert one_step_delta(65536, ONE) == pytest.approx(0.5425, abs=1e-4)
    d = [one_step_delta(2**k, ONE) for k in range(2, 31)]
    assert all(a > b for a, b in zip(d, d[1:]))
    assert one_step_failure_probability(2.0, 3, 4) == pytest.approx(2 * 19 / 16)


def test_estimate_delta_doubles():
    for L in (0.5, 1.0, 3.0):
        h = HolderParams(L)
        assert estimate_delta(4096, h) == pytest.approx(2 * one_step_delta(4096, h))
    assert estimate_failure_probability(3.0, 3, 2) == pytest.approx(2 * 7 * 3**-4 + 3**-16)


def test_cumulative_confidence():
    v = cumulative_confidence(10**4, ONE, 0.1)
    assert v == pytest.approx(((80 / 3) * (1e4 / math.log(1e4)) ** 2) ** (1 / 3))
    assert cumulative_confidence(10**4, ONE, 0.05) / v == pytest.approx(2 ** (1 / 3))
    vals = [cumulative_confidence(2**k, ONE, 0.1) for k in range(2, 25)]
    assert vals == sorted(vals)
    with pytest.raises(ValueError):
        cumulative_confidence(100, ONE, 1.0)


def test_audit_identical_arms():
    rep = suboptimality_audit(np.array([0, 1, 2, 1, 0]), [0.4, 0.4, 0.4], 0.1)
    assert rep.big_gap_arms.size == 0 and rep.undersampled_steps.size == 0 and rep.suboptimal_plays.size == 0


def test_audit_gaps_nonnegative():
    rep = suboptimality_audit(np.array([0, 1]), [0.2, 0.9, 0.5], 0.05)
    assert np.all(rep.gaps >= 0) and rep.gaps[1] == 0
    assert list(rep.big_gap_arms) == [0, 2]
    assert list(rep.suboptimal_plays) == [1]


def test_audit_two_arm_bernoulli_mean_within_bound():
    T, means = 10_000, (0.9, 0.5)
    counts = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        p = UCB1(2)
        arms = np.empty(T, dtype=int)
        for t in range(T):
            a = p.select()
            arms[t] = a
            p.update(a, float(rng.random() < means[a]))
        rep = suboptimality_audit(arms, means, 0.1)
        counts.append(rep.suboptimal_plays.size)
    bound = 8 * math.log(T) / 0.16 + (1 + math.pi**2 / 3)
    assert rep.expected_bound == pytest.approx(bound)
    assert np.mean(counts) <= bound


def test_plan_budget_examples():
    assert plan_budget(1.0, 100) == 100
    assert abs(plan_budget(0.2167, 100) - 463) <= 3
    assert abs(plan_budget(0.1153, 100) - 865) <= 3
    with pytest.raises(InfeasiblePlanError):
        plan_budget(0.0, 5)
    with pytest.raises(ValueError):
        plan_budget(0.5, 0)


@given(st.floats(1e-6, 1.0), st.integers(1, 10**6))
def test_plan_budget_covers_need(per, n):
    k = plan_budget(per, n)
    assert k * per >= n
    assert (k - 1) * per < n + 1e-6 * n


def test_bound_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(10, ONE, epsilon=0.0)
    with pytest.raises(ValueError):
        BoundInputs(10, ONE, delta_min_lower=0.0)
