"""Finite-armed stochastic bandit policies for rewards in [0, 1]."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np


def _check_reward(reward: float) -> None:
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward {reward!r} outside [0, 1]; the cost is not normalized")


@dataclass(frozen=True)
class ArmStats:
    pulls: int = 0
    mean_reward: float = 0.0
    cumulative_reward: float = 0.0


def ucb1_update(stats: ArmStats, reward: float) -> ArmStats:
    _check_reward(reward)
    pulls = stats.pulls + 1
    total = stats.cumulative_reward + reward
    return ArmStats(pulls, total / pulls, total)


def ucb1_select(stats: Sequence[ArmStats], t: int) -> int:
    """Index of the arm maximizing mean + sqrt(2 ln t / pulls).

    Unplayed arms come first, lowest index first; index ties go to the lowest arm.
    """
    if len(stats) == 0:
        raise ValueError("no arms to choose from")
    pulls = np.array([s.pulls for s in stats])
    means = np.array([s.mean_reward for s in stats])
    return _ucb1_argmax(pulls, means, t)


def _ucb1_argmax(pulls: np.ndarray, means: np.ndarray, t: int) -> int:
    unplayed = np.flatnonzero(pulls == 0)
    if unplayed.size:
        return int(unplayed[0])
    bonus = np.sqrt(2.0 * math.log(max(t, 1)) / pulls)
    return int(np.argmax(means + bonus))


def epsilon_greedy_probability(t: int, epsilon0: float) -> float:
    """Exploration probability epsilon0 ** (t / 10)."""
    return epsilon0 ** (t / 10.0)


def epsilon_greedy_select(stats: Sequence[ArmStats], t: int, epsilon0: float, rng: np.random.Generator) -> int:
    if not 0.0 < epsilon0 < 1.0:
        raise ValueError("epsilon0 must lie in (0, 1)")
    if rng.random() < epsilon_greedy_probability(t, epsilon0):
        return int(rng.integers(len(stats)))
    return int(np.argmax([s.mean_reward for s in stats]))


class Policy:
    """Array-backed arm statistics shared by the concrete policies."""

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.n_arms = n_arms
        self.pulls = np.zeros(n_arms, dtype=np.int64)
        self.sums = np.zeros(n_arms)
        self.t = 0

    @property
    def means(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pulls > 0, self.sums / np.maximum(self.pulls, 1), 0.0)

    def stats(self) -> list[ArmStats]:
        means = self.means
        return [ArmStats(int(p), float(m), float(s)) for p, m, s in zip(self.pulls, means, self.sums)]

    def update(self, arm: int, reward: float) -> None:
        _check_reward(reward)
        self.pulls[arm] += 1
        self.sums[arm] += reward
        self.t += 1

    def select(self) -> int:
        raise NotImplementedError


class UCB1(Policy):
    """UCB1 with the time index counted from this instance's first play."""

    def __init__(self, n_arms: int):
        super().__init__(n_arms)
        self._unplayed = n_arms

    def update(self, arm, reward):
        if self.pulls[arm] == 0:
            self._unplayed -= 1
        super().update(arm, reward)

    def select(self) -> int:
        if self._unplayed:
            return int(np.argmax(self.pulls == 0))
        bonus = np.sqrt(2.0 * math.log(self.t) / self.pulls)
        return int(np.argmax(self.sums / self.pulls + bonus))

    def indices(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            bonus = np.sqrt(2.0 * math.log(max(self.t, 1)) / self.pulls)
        return np.where(self.pulls > 0, self.means + bonus, np.inf)


class EpsilonGreedy(Policy):
    def __init__(self, n_arms: int, epsilon0: float, rng: np.random.Generator):
        super().__init__(n_arms)
        if not 0.0 < epsilon0 < 1.0:
            raise ValueError("epsilon0 must lie in (0, 1)")
        self.epsilon0 = epsilon0
        self.rng = rng

    def select(self) -> int:
        if self.rng.random() < epsilon_greedy_probability(self.t, self.epsilon0):
            return int(self.rng.integers(self.n_arms))
        return int(np.argmax(self.means))


# -- UCB-Improved -----------------------------------------------------------

def elimination_quota(delta_tilde: float, horizon: int) -> int:
    """Cumulative pulls each surviving arm needs by the end of a round."""
    x = horizon * delta_tilde**2
    if x <= 1.0:
        return 1
    return max(1, math.ceil(2.0 * math.log(x) / delta_tilde**2))


def elimination_rounds(horizon: int) -> int:
    """Last round index, floor(log2(T / e) / 2)."""
    if horizon <= math.e:
        return 0
    return int(math.floor(0.5 * math.log2(horizon / math.e)))


@dataclass(frozen=True)
class EliminationState:
    round_m: int
    delta_tilde: float
    active_set: tuple[int, ...]
    per_round_quota: int
    cursor: int = 0
    exhausted: bool = False

    @classmethod
    def initial(cls, n_arms: int, horizon: int, delta_tilde0: float = 1.0) -> "EliminationState":
        return cls(0, delta_tilde0, tuple(range(n_arms)), elimination_quota(delta_tilde0, horizon))


def _eliminate(state: EliminationState, means: np.ndarray, horizon: int) -> EliminationState:
    active = np.array(state.active_set)
    x = horizon * state.delta_tilde**2
    radius = math.sqrt(max(math.log(x), 0.0) / (2.0 * state.per_round_quota)) if x > 1 else math.inf
    m = means[active]
    keep = m + radius >= np.max(m - radius)
    survivors = tuple(int(a) for a in active[keep])
    delta = state.delta_tilde / 2.0
    nxt = state.round_m + 1
    return EliminationState(
        nxt, delta, survivors, elimination_quota(delta, horizon), 0, nxt > elimination_rounds(horizon)
    )


def ucb_improved_step(state: EliminationState, pulls: np.ndarray, means: np.ndarray, horizon: int):
    """Pick the next arm for UCB-Improved, eliminating at round ends.

    Returns ``(arm, state)``; ``state`` is a new value whenever a round closed.
    Arms are cycled round-robin until every survivor has ``per_round_quota``
    cumulative pulls.  Once the round budget is spent with several survivors
    left, the best empirical survivor is played.
    """
    if not state.active_set:
        raise ValueError("active set is empty")
    for _ in range(64):
        active = state.active_set
        if len(active) == 1:
            return active[0], state
        if state.exhausted:
            best = max(active, key=lambda a: (means[a], -a))
            return best, state
        k = len(active)
        for step in range(k):
            pos = (state.cursor + step) % k
            arm = active[pos]
            if pulls[arm] < state.per_round_quota:
                return arm, replace(state, cursor=(pos + 1) % k)
        state = _eliminate(state, means, horizon)
    raise RuntimeError("UCB-Improved failed to make progress")


class UCBImproved(Policy):
    """Successive elimination with halving gap guesses (Auer & Ortner style)."""

    def __init__(self, n_arms: int, horizon: int, delta_tilde0: float = 1.0):
        super().__init__(n_arms)
        if horizon < 1:
            raise ValueError("horizon must be positive")
        self.horizon = horizon
        self.state = EliminationState.initial(n_arms, horizon, delta_tilde0)

    def select(self) -> int:
        arm, self.state = ucb_improved_step(self.state, self.pulls, self.means, self.horizon)
        return int(arm)

    @property
    def active_set(self) -> tuple[int, ...]:
        return self.state.active_set


def make_policy(kind: str, n_arms: int, horizon: int, *, epsilon0: float = 0.9,
                rng: Optional[np.random.Generator] = None) -> Policy:
    if kind == "ucb1":
        return UCB1(n_arms)
    if kind == "ucb-improved":
        return UCBImproved(n_arms, horizon)
    if kind == "epsilon-greedy":
        if rng is None:
            raise ValueError("epsilon-greedy needs a random generator")
        return EpsilonGreedy(n_arms, epsilon0, rng)
    raise ValueError(f"unknown policy {kind!r}")
