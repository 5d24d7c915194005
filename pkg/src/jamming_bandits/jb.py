"""Discretize-and-learn meta-algorithms over the mixed jamming action space.

The outer loop runs rounds of length 1, 2, 4, ...; each round picks a grid
resolution M for the (JNR, rho) box, builds ``N_mod * M**2`` arms and runs a
fresh finite-armed policy on them.  Nothing is carried between rounds.
"""
from __future__ import annotations

import math
import os
import pickle
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .analytic import HolderParams
from .environment import ActionSpace
from .phy import SCHEMES_BY_CODE, JammerAction, Scheme
from .policies import UCB1, EpsilonGreedy, Policy, UCBImproved
from .trace import RegretTrace

DEFAULT_ARM_BUDGET = 2_000_000


class ArmBudgetError(MemoryError):
    """A round asked for more arms than the configured budget."""


class ActionGrid:
    """Uniform grid over schemes x JNR x rho.

    Points are ``k / M`` for rho and ``jnr_min + (jnr_max - jnr_min) k / M``
    for JNR, k = 1..M.  When ``jnr_min == jnr_max`` the JNR axis is a single
    point and the grid has ``N_mod * M`` arms.  Arm order is scheme-major,
    then JNR, then rho.
    """

    def __init__(self, schemes: Sequence, m: int, jnr_min: float, jnr_max: float):
        if m < 1:
            raise ValueError("grid resolution must be at least 1")
        if jnr_max < jnr_min:
            raise ValueError("jnr range is reversed")
        self.schemes = tuple(Scheme.parse(s) for s in schemes)
        if not self.schemes:
            raise ValueError("need at least one scheme")
        self.m = m
        self.jnr_min = float(jnr_min)
        self.jnr_max = float(jnr_max)
        k = np.arange(1, m + 1) / m
        self.rho_points = k
        self.jnr_points = (np.array([self.jnr_max]) if self.fixed_jnr
                           else self.jnr_min + (self.jnr_max - self.jnr_min) * k)
        n_s, n_j, n_r = len(self.schemes), len(self.jnr_points), m
        self.codes = np.repeat([s.code for s in self.schemes], n_j * n_r)
        self.jnr = np.tile(np.repeat(self.jnr_points, n_r), n_s)
        self.rho = np.tile(self.rho_points, n_s * n_j)
        self._actions: Optional[list] = None

    @classmethod
    def over(cls, space: ActionSpace, m: int) -> "ActionGrid":
        return cls(space.schemes, m, space.jnr_min, space.jnr_max)

    @property
    def fixed_jnr(self) -> bool:
        return self.jnr_min == self.jnr_max

    @property
    def size(self) -> int:
        return int(self.codes.size)

    def __len__(self):
        return self.size

    def action(self, i: int) -> JammerAction:
        if self._actions is None:
            self._actions = [
                JammerAction(SCHEMES_BY_CODE[int(c)], float(j), float(r))
                for c, j, r in zip(self.codes, self.jnr, self.rho)
            ]
        return self._actions[i]

    def index_of(self, scheme, jnr: float, rho: float) -> int:
        """Index of the nearest grid arm of the given scheme."""
        scheme = Scheme.parse(scheme)
        d = np.abs(self.normalized_jnr(self.jnr) - self.normalized_jnr(jnr)) + np.abs(self.rho - rho)
        d = np.where(self.codes == scheme.code, d, np.inf)
        return int(np.argmin(d))

    def normalized_jnr(self, jnr):
        """JNR mapped affinely so the box (jnr_min, jnr_max] becomes (0, 1]."""
        if self.fixed_jnr:
            return np.ones_like(np.asarray(jnr, dtype=float))
        return (np.asarray(jnr, dtype=float) - self.jnr_min) / (self.jnr_max - self.jnr_min)

    def expected(self, env) -> np.ndarray:
        return env.expected_rewards(self.codes, self.jnr, self.rho)


# -- schedules and resolution -------------------------------------------------

@dataclass(frozen=True)
class RoundSchedule:
    index: int
    start: int  # 1-based step at which the round begins
    round_length: int  # nominal T
    steps: int  # steps actually run (last round may be cut)
    horizon: int


def round_schedule(horizon: int) -> Iterator[RoundSchedule]:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    T, k = 1, 0
    while T <= horizon:
        yield RoundSchedule(k, T, T, min(2 * T - 1, horizon) - T + 1, horizon)
        T *= 2
        k += 1


def compute_m(round_length: int, holder: HolderParams) -> int:
    """Grid resolution balancing discretization loss against learning cost."""
    if round_length < 1:
        raise ValueError("round_length must be at least 1")
    T = round_length
    if T <= 2:
        return 1
    a = holder.exponent_alpha
    core = math.sqrt(T / math.log(T)) * holder.constant_L * 2.0 ** (a / 2.0)
    return max(1, math.ceil(core ** (1.0 / (1.0 + a))))


def elimination_residual(m: float, round_length: int, holder: HolderParams) -> float:
    m2 = m * m
    T = round_length
    left = T * holder.constant_L * (2.0 / m2) ** (holder.exponent_alpha / 2.0)
    right = math.sqrt(m2 * T) * math.log(m2 * math.log(m2)) / math.sqrt(math.log(m2))
    return left - right


def compute_m_elimination(round_length: int, holder: HolderParams, full_output: bool = False):
    """Resolution for the elimination variant, by integer bisection on [2, 1e6].

    Returns the smallest integer M with a nonpositive residual, i.e. the
    ceiling of the root.  Without a sign change over the bracket the answer
    is 2; ``full_output=True`` also returns whether a root was bracketed.
    """
    if round_length < 4:
        raise ValueError("round_length must be at least 4")
    lo, hi = 2, 10**6
    f = lambda m: elimination_residual(m, round_length, holder)  # noqa: E731
    if f(lo) <= 0 or f(hi) > 0:
        return (2, False) if full_output else 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (hi, True) if full_output else hi


def round_resolution(round_length: int, holder: HolderParams, inner: str) -> int:
    if inner == "ucb-improved":
        return 1 if round_length < 4 else compute_m_elimination(round_length, holder)
    return compute_m(round_length, holder)


# -- the learning loop --------------------------------------------------------

class _Recorder:
    def __init__(self, horizon: int):
        self.trace = RegretTrace.empty(horizon)
        self.n = 0
        self.cum = 0.0

    def record(self, grid: ActionGrid, arm: int, fb, expected: float, best: float, round_index: int):
        tr, i = self.trace, self.n
        tr.t[i] = i + 1
        tr.arm[i] = arm
        tr.scheme[i] = grid.codes[arm]
        tr.jnr[i] = grid.jnr[arm]
        tr.rho[i] = grid.rho[arm]
        tr.reward[i] = fb.reward
        tr.per_est[i] = fb.per_estimate
        tr.ser_est[i] = fb.ser_estimate
        tr.expected[i] = expected
        tr.oracle_best[i] = best
        self.cum += best - expected
        tr.cum_regret[i] = self.cum
        tr.round_index[i] = round_index
        tr.m[i] = grid.m
        self.n += 1


class _GridView:
    """Expected rewards of a grid's arms, refreshed when the victim moves."""

    def __init__(self, env, grid: ActionGrid):
        self.env, self.grid = env, grid
        self.version = None

    def refresh(self):
        if self.version != self.env.state_version:
            self.values = self.grid.expected(self.env)
            self.best = self.env.oracle_best()
            self.version = self.env.state_version


def _play_steps(env, grid: ActionGrid, view: _GridView, rec: _Recorder, steps: int, round_index: int,
                choose: Callable[[], int], learn: Callable[[int, float], None]):
    for _ in range(steps):
        view.refresh()
        arm = choose()
        fb = env.step(grid.action(arm))
        learn(arm, fb.reward)
        rec.record(grid, arm, fb, float(view.values[arm]), view.best, round_index)


def _new_policy(inner: str, n_arms: int, round_length: int) -> Policy:
    if inner == "ucb1":
        return UCB1(n_arms)
    if inner == "ucb-improved":
        return UCBImproved(n_arms, round_length)
    raise ValueError(f"unknown inner policy {inner!r}")


def _run_round_plain(env, grid, rec, sched, inner):
    policy = _new_policy(inner, grid.size, sched.round_length)
    view = _GridView(env, grid)
    _play_steps(env, grid, view, rec, sched.steps, sched.index, policy.select, policy.update)


def _run_round_drifting(env, grid, rec, sched, inner, window_w):
    """Overlapping frames: each half-window is one frame's active slot and the next frame's passive slot."""
    half = window_w // 2
    view = _GridView(env, grid)
    acting = building = _new_policy(inner, grid.size, sched.round_length)

    def learn(arm, reward):
        acting.update(arm, reward)
        if building is not acting:
            building.update(arm, reward)

    done = 0
    h = 0
    while done < sched.steps:
        if h == 1:
            building = _new_policy(inner, grid.size, sched.round_length)
        elif h >= 2:
            acting, building = building, _new_policy(inner, grid.size, sched.round_length)
        n = min(half, sched.steps - done)
        _play_steps(env, grid, view, rec, n, sched.index, lambda: acting.select(), learn)
        done += n
        h += 1


def _load_checkpoint(path):
    if path and os.path.exists(path):
        with open(path, "rb") as fh:
            return pickle.load(fh)
    return None


def _save_checkpoint(path, payload):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        pickle.dump(payload, fh, protocol=pickle.HIGHEST_PROTOCOL)
    os.replace(tmp, path)


def _jb_loop(env, horizon, holder, inner, space, window_w, fixed_m, arm_budget, checkpoint):
    space = space or env.space
    state = _load_checkpoint(checkpoint)
    if state is not None:
        env, rec, next_round = state["env"], state["recorder"], state["next_round"]
    else:
        rec, next_round = _Recorder(horizon), 0
    for sched in round_schedule(horizon):
        if sched.index < next_round:
            continue
        m = fixed_m or round_resolution(sched.round_length, holder, inner)
        n_arms = len(space.schemes) * m * (1 if space.jnr_min == space.jnr_max else m)
        if n_arms > arm_budget:
            raise ArmBudgetError(f"round {sched.index} needs {n_arms} arms, budget is {arm_budget}")
        grid = ActionGrid.over(space, m)
        if window_w is None or window_w >= 2 * sched.steps:
            _run_round_plain(env, grid, rec, sched, inner)
        else:
            _run_round_drifting(env, grid, rec, sched, inner, window_w)
        if checkpoint:
            _save_checkpoint(checkpoint, {"env": env, "recorder": rec, "next_round": sched.index + 1})
    return rec.trace


def jb_run(env, horizon: int, holder: HolderParams, inner: str = "ucb1", rng=None, *,
           space: Optional[ActionSpace] = None, fixed_m: Optional[int] = None,
           arm_budget: int = DEFAULT_ARM_BUDGET, checkpoint: Optional[str] = None) -> RegretTrace:
    """Doubling-trick learner.

    ``rng`` is accepted for interface symmetry; both inner policies are
    deterministic given the feedback.  With ``checkpoint`` set, state is
    pickled after every round and a rerun resumes from the last finished
    round with identical results.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    return _jb_loop(env, horizon, holder, inner, space, None, fixed_m, arm_budget, checkpoint)


def jb_drifting_run(env, horizon: int, holder: HolderParams, window_w: int, rng=None, *,
                    inner: str = "ucb1", space: Optional[ActionSpace] = None,
                    fixed_m: Optional[int] = None, arm_budget: int = DEFAULT_ARM_BUDGET,
                    checkpoint: Optional[str] = None) -> RegretTrace:
    """Doubling-trick learner with sliding, half-overlapping statistics windows."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if window_w < 2 or window_w % 2:
        raise ValueError("window_w must be an even count of at least 2")
    return _jb_loop(env, horizon, holder, inner, space, window_w, fixed_m, arm_budget, checkpoint)


def grid_policy_run(env, horizon: int, grid: ActionGrid, policy: Policy) -> RegretTrace:
    """Run one policy on one fixed grid for the whole horizon (no doubling)."""
    rec = _Recorder(horizon)
    _play_steps(env, grid, _GridView(env, grid), rec, horizon, 0, policy.select, policy.update)
    return rec.trace


def epsilon_greedy_run(env, horizon: int, m: int, epsilon0: float, rng: np.random.Generator,
                       space: Optional[ActionSpace] = None) -> RegretTrace:
    grid = ActionGrid.over(space or env.space, m)
    return grid_policy_run(env, horizon, grid, EpsilonGreedy(grid.size, epsilon0, rng))


class _Fixed(Policy):
    def select(self):
        return 0


def fixed_action_run(env, horizon: int, action: JammerAction) -> RegretTrace:
    grid = ActionGrid([action.scheme], 1, action.jnr, action.jnr)
    grid.rho = np.array([action.rho])
    return grid_policy_run(env, horizon, grid, _Fixed(1))
