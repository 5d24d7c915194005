import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jamming_bandits.policies import (
    UCB1, ArmStats, EliminationState, EpsilonGreedy, UCBImproved, elimination_quota, elimination_rounds,
    epsilon_greedy_probability, epsilon_greedy_select, make_policy, ucb1_select, ucb1_update, ucb_improved_step,
)


def bernoulli_run(policy, means, T, rng):
    for _ in range(T):
        a = policy.select()
        policy.update(a, float(rng.random() < means[a]))
    return policy


def test_ucb1_select_examples():
    assert ucb1_select([ArmStats(0), ArmStats(5, 0.9, 4.5)], 5) == 0
    assert ucb1_select([ArmStats(3, 0.1, 0.3)], 10) == 0
    stats = [ArmStats(4, 0.5, 2.0), ArmStats(100, 0.9, 90.0)]
    i0 = 0.5 + math.sqrt(2 * math.log(100) / 4)
    i1 = 0.9 + math.sqrt(2 * math.log(100) / 100)
    assert i0 == pytest.approx(2.017, abs=1e-3) and i1 == pytest.approx(1.203, abs=1e-3)
    assert ucb1_select(stats, 100) == 0


def test_ucb1_select_ties_go_low():
    assert ucb1_select([ArmStats(2, 0.5, 1.0), ArmStats(2, 0.5, 1.0)], 4) == 0


def test_ucb1_update_examples():
    s = ucb1_update(ArmStats(), 0.3)
    assert (s.pulls, s.mean_reward) == (1, pytest.approx(0.3))
    s = ucb1_update(s, 0.5)
    assert (s.pulls, s.mean_reward) == (2, pytest.approx(0.4))
    with pytest.raises(ValueError):
        ucb1_update(s, 1.2)


def test_class_and_functional_ucb1_agree():
    rng = np.random.default_rng(4)
    p = UCB1(5)
    stats = [ArmStats() for _ in range(5)]
    for t in range(1, 400):
        a = p.select()
        assert a == ucb1_select(stats, t - 1 if t > 1 else 1)
        r = float(rng.random())
        p.update(a, r)
        stats[a] = ucb1_update(stats[a], r)


def test_ucb1_indices_finite_after_init():
    p = UCB1(3)
    for a in range(3):
        p.update(a, 0.5)
    assert np.all(np.isfinite(p.indices()))


def test_ucb1_pull_bound_two_arms():
    T, gap = 10_000, 0.4
    ok = 0
    for seed in range(40):
        p = bernoulli_run(UCB1(2), [0.9, 0.5], T, np.random.default_rng(seed))
        ok += p.pulls[1] <= 8 * math.log(T) / gap**2 + 10
    assert ok / 40 >= 0.95


def test_epsilon_schedule():
    assert epsilon_greedy_probability(0, 0.9) == 1.0
    assert epsilon_greedy_probability(10, 0.9) == pytest.approx(0.9)
    assert epsilon_greedy_probability(10_000, 0.9) < 1e-4


def test_epsilon_greedy_exploits_late():
    rng = np.random.default_rng(0)
    stats = [ArmStats(5, 0.1, 0.5), ArmStats(5, 0.7, 3.5), ArmStats(5, 0.7, 3.5)]
    picks = [epsilon_greedy_select(stats, t, 0.9, rng) for t in range(10_000, 20_000)]
    assert set(picks) == {1}
    with pytest.raises(ValueError):
        epsilon_greedy_select(stats, 0, 1.0, rng)


def test_epsilon_greedy_class_explores_early():
    p = EpsilonGreedy(10, 0.9, np.random.default_rng(1))
    assert len({p.select() for _ in range(50)}) > 1


def test_elimination_quota_and_rounds():
    assert elimination_quota(1.0, 1000) == 14
    assert elimination_quota(0.01, 100) == 1  # T * gap^2 <= 1
    assert elimination_rounds(10_000) == math.floor(0.5 * math.log2(10_000 / math.e))
    assert elimination_rounds(2) == 0


def test_elimination_singleton_is_fixed_point():
    st_ = EliminationState(3, 0.125, (4,), 7)
    arm, nxt = ucb_improved_step(st_, np.zeros(6, dtype=int), np.zeros(6), 1000)
    assert arm == 4 and nxt == st_


def test_elimination_round_robin_order():
    p = UCBImproved(3, 1000)
    seq = []
    for _ in range(6):
        a = p.select()
        seq.append(a)
        p.update(a, 0.5)
    assert seq == [0, 1, 2, 0, 1, 2]


def test_elimination_drops_worse_arm():
    T = 10_000
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        p = UCBImproved(2, T)
        eliminated_at = None
        for _ in range(T):
            a = p.select()
            p.update(a, float(rng.random() < (0.9, 0.1)[a]))
            if eliminated_at is None and p.active_set == (0,):
                eliminated_at = p.state.delta_tilde * 2  # gap guess of the round that dropped it
        hits += eliminated_at is not None and eliminated_at / 2 < 0.4
    assert hits / 100 >= 0.95


def test_elimination_keeps_best_arm():
    T = 10_000
    kept = 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        p = bernoulli_run(UCBImproved(3, T), [0.3, 0.65, 0.35], T, rng)
        kept += 1 in p.active_set
    assert kept >= 99


@given(st.lists(st.floats(0, 1), min_size=1, max_size=200), st.integers(1, 6))
def test_policies_replay_identically(rewards, n_arms):
    def play(policy):
        arms = []
        for r in rewards:
            a = policy.select()
            arms.append(a)
            policy.update(a, r)
        return arms

    for kind in ("ucb1", "ucb-improved", "epsilon-greedy"):
        a = play(make_policy(kind, n_arms, 500, rng=np.random.default_rng(3)))
        b = play(make_policy(kind, n_arms, 500, rng=np.random.default_rng(3)))
        assert a == b
        assert all(0 <= x < n_arms for x in a)


def test_policy_rejects_bad_reward_and_kind():
    with pytest.raises(ValueError):
        UCB1(2).update(0, -0.1)
    with pytest.raises(ValueError):
        make_policy("thompson", 2, 10)
    with pytest.raises(ValueError):
        make_policy("epsilon-greedy", 2, 10)
