"""Theoretical regret and confidence quantities, with unit leading constants.

These are shape curves for overlaying on measured regret, not tight
predictions.  All functions are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import HolderParams


class InfeasiblePlanError(ValueError):
    """No number of transmissions reaches the goal at zero PER."""


@dataclass(frozen=True)
class BoundInputs:
    horizon: int
    holder: HolderParams
    n_mod: int = 3
    m: int = 1
    epsilon: float = 0.1
    delta_min_lower: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.delta_min_lower is not None and self.delta_min_lower <= 0:
            raise ValueError("delta_min_lower must be positive")


def regret_curve(inputs: BoundInputs, t) -> np.ndarray | float:
    """N_mod * t^((a+2)/(2(a+1))) * (ln t)^(a/(2(a+1)))."""
    a = inputs.holder.exponent_alpha
    t = np.asarray(t, dtype=float)
    if np.any(t < 2):
        raise ValueError("t must be at least 2")
    out = inputs.n_mod * t ** ((a + 2) / (2 * (a + 1))) * np.log(t) ** (a / (2 * (a + 1)))
    return float(out) if out.ndim == 0 else out


def one_step_delta(round_T: int, holder: HolderParams) -> float:
    """Gap that the arm played at one step exceeds only with small probability."""
    if round_T < 2:
        raise ValueError("round_T must be at least 2")
    a, L = holder.exponent_alpha, holder.constant_L
    return (2.0 * 2.0 ** ((3 * a + 2) / (2 * (1 + a))) * L ** (1 / (1 + a))
            * (math.log(round_T) / round_T) ** (a / (2 * (1 + a))))


def one_step_failure_probability(t, n_mod: int, m: int):
    """2 (N_mod + M^2) t^-4, the chance the one-step gap exceeds delta at step t."""
    t = np.asarray(t, dtype=float)
    out = 2.0 * (n_mod + m * m) * t**-4.0
    return float(out) if out.ndim == 0 else out


def estimate_delta(round_T: int, holder: HolderParams) -> float:
    """One-step gap when the optimum is judged from estimated costs: the plain delta times 2."""
    a = holder.exponent_alpha
    return one_step_delta(round_T, holder) * 2.0 ** ((2 * a + 2) / (2 * (1 + a)))


def estimate_failure_probability(t, n_mod: int, m: int):
    t = np.asarray(t, dtype=float)
    out = one_step_failure_probability(t, n_mod, m) + t**-16.0
    return float(out) if out.ndim == 0 else out


def cumulative_confidence(round_T: int, holder: HolderParams, epsilon: float) -> float:
    """Per-scheme cumulative-regret level exceeded with probability below epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if round_T < 3:
        raise ValueError("round_T must be at least 3")
    a = holder.exponent_alpha
    return ((8.0 / (3.0 * epsilon)) * (round_T / math.log(round_T)) ** (4.0 / (1 + a))) ** (1.0 / 3.0)


def bound_overlays(horizon: int, holder: HolderParams, n_mod: int, m: int, epsilon: float = 0.1) -> dict:
    """The bound values reported next to a run, keyed by name."""
    out = {"regret_curve": regret_curve(BoundInputs(horizon, holder, n_mod, m, epsilon), max(horizon, 2))}
    if horizon >= 2:
        out["one_step_delta"] = one_step_delta(horizon, holder)
        out["one_step_failure_probability"] = one_step_failure_probability(horizon, n_mod, m)
        out["estimate_delta"] = estimate_delta(horizon, holder)
        out["estimate_failure_probability"] = estimate_failure_probability(horizon, n_mod, m)
    if horizon >= 3:
        out["cumulative_confidence_per_scheme"] = cumulative_confidence(horizon, holder, epsilon)
    return out


# -- sub-optimality bookkeeping ----------------------------------------------

@dataclass
class AuditReport:
    """What one run's choices look like against the per-arm oracle means.

    ``big_gap_arms`` is the set of arms whose gap exceeds the threshold.
    ``undersampled_steps`` are the steps at which some big-gap arm had fewer
    than 8 ln T / gap^2 pulls so far.  ``suboptimal_plays`` are the steps at
    which a big-gap arm was actually played; this is the count whose mean
    is bounded by ``expected_bound``.
    """

    horizon: int
    delta_threshold: float
    gaps: np.ndarray
    big_gap_arms: np.ndarray
    undersampled_steps: np.ndarray
    suboptimal_plays: np.ndarray
    expected_bound: float
    within_bound: bool = field(init=False)

    def __post_init__(self):
        self.within_bound = bool(self.suboptimal_plays.size <= self.expected_bound)

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "delta_threshold": self.delta_threshold,
            "n_big_gap_arms": int(self.big_gap_arms.size),
            "n_undersampled_steps": int(self.undersampled_steps.size),
            "n_suboptimal_plays": int(self.suboptimal_plays.size),
            "expected_bound": self.expected_bound,
            "within_bound": self.within_bound,
        }


def suboptimality_audit(trace, oracle_means, delta_threshold: float, horizon: Optional[int] = None) -> AuditReport:
    """Audit one policy run on one fixed arm set.

    ``trace`` is a RegretTrace or a plain array of played arm indices.
    """
    arms = np.asarray(getattr(trace, "arm", trace), dtype=np.int64)
    means = np.asarray(oracle_means, dtype=float)
    T = int(horizon or arms.size)
    gaps = means.max() - means
    big = np.flatnonzero(gaps > delta_threshold)
    log_t = math.log(max(T, 2))
    if big.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return AuditReport(T, delta_threshold, gaps, big, empty, empty, 0.0)
    need = 8.0 * log_t / gaps[big] ** 2
    is_big = np.zeros(means.size, dtype=bool)
    is_big[big] = True
    played_big = is_big[arms]
    # pulls of each big-gap arm strictly before every step
    under = np.zeros(arms.size, dtype=bool)
    for arm, quota in zip(big, need):
        before = np.cumsum(arms == arm) - (arms == arm)
        under |= before < quota
    bound = float(np.sum(need) + (1.0 + math.pi**2 / 3.0) * big.size)
    return AuditReport(T, delta_threshold, gaps, big, np.flatnonzero(under) + 1,
                       np.flatnonzero(played_big) + 1, bound)


def plan_budget(per_achieved: float, packets_needed: int) -> int:
    """Expected transmissions for ``packets_needed`` of them to be lost."""
    if not 0.0 <= per_achieved <= 1.0:
        raise ValueError("per_achieved must lie in [0, 1]")
    if packets_needed < 1:
        raise ValueError("packets_needed must be at least 1")
    if per_achieved == 0.0:
        raise InfeasiblePlanError("zero PER never jams a packet")
    # round() first so 100 / 0.25 = 400.00000000000006 style noise does not bump ceil
    k = math.ceil(round(packets_needed / per_achieved, 9))
    while k * per_achieved < packets_needed:
        k += 1
    return k
