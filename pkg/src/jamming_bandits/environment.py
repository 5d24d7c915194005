"""Victims, ACK/NACK feedback and reward construction.

The jammer never sees the victim's scheme or SNR; it only sees how many
packets were NACKed (and, in the direct-SER setting, how many symbols were
wrong).  Two fidelities produce that feedback: ``symbol`` runs every symbol
through :func:`jamming_bandits.phy.simulate_packet`; ``analytic`` draws the
symbol-error count from its exact binomial law.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import analytic
from .phy import (
    ChannelParams,
    ErrorRule,
    JammerAction,
    Scheme,
    SCHEMES_BY_CODE,
    db_to_lin,
    packet_rngs,
    simulate_packet,
)

REWARD_KINDS = ("raw-ser", "raw-per", "thresholded-per", "thresholded-ser")
_REWARD_ALIASES = {
    "thresholded-per-per-jnr": "thresholded-per",
    "thresholded-ser-per-jnr": "thresholded-ser",
}
FIDELITIES = ("analytic", "symbol")
SNR_NODES = 16


@dataclass(frozen=True)
class RewardSpec:
    """How feedback turns into a reward in [0, 1].

    Thresholded kinds pay ``max(error_rate - target, 0) / jnr`` with jnr
    linear, so they stay below ``1 - target`` as long as jnr >= 1.
    """

    kind: str = "raw-ser"
    target: Optional[float] = None

    def __post_init__(self):
        kind = _REWARD_ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in REWARD_KINDS:
            raise ValueError(f"unknown reward kind {self.kind!r}")
        if kind.startswith("thresholded"):
            if self.target is None or not 0.0 < self.target < 1.0:
                raise ValueError("thresholded rewards need a target in (0, 1)")

    @property
    def thresholded(self) -> bool:
        return self.kind.startswith("thresholded")

    def value(self, per: float, ser: float, jnr: float) -> float:
        if self.kind == "raw-ser":
            return ser
        if self.kind == "raw-per":
            return per
        rate = per if self.kind == "thresholded-per" else ser
        return max(rate - self.target, 0.0) / jnr


@dataclass(frozen=True)
class VictimProfile:
    """Victim behavior.

    ``static`` keeps (scheme, snr_db).  ``iid`` redraws the scheme from
    ``schemes`` (probabilities ``scheme_probs``, uniform by default) and the
    SNR uniformly in dB over ``snr_range_db`` at every step.  ``adaptive``
    looks at its own PER over each ``adapt_window`` steps and, when it
    exceeds ``trigger`` (or unconditionally when ``trigger`` is None),
    either redraws its SNR uniformly (``rule="redraw"``) or raises it by
    ``step_db`` (``rule="step"``, stepping down again when PER is below).
    """

    policy: str = "static"
    scheme: Scheme = Scheme.BPSK
    snr_db: float = 20.0
    schemes: tuple = (Scheme.BPSK, Scheme.QPSK)
    scheme_probs: Optional[tuple] = None
    snr_range_db: tuple = (0.0, 20.0)
    adapt_window: int = 50_000
    trigger: Optional[float] = 0.2
    rule: str = "redraw"
    step_db: float = 2.0
    n_symbols: int = 10_000
    error_rule: ErrorRule = field(default_factory=ErrorRule)

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))
        object.__setattr__(self, "error_rule", ErrorRule.parse(self.error_rule))
        object.__setattr__(self, "snr_range_db", tuple(float(v) for v in self.snr_range_db))
        errors = self.validate()
        if errors:
            raise ValueError("; ".join(errors))

    def validate(self) -> list[str]:
        errors = []
        if self.policy not in ("static", "iid", "adaptive"):
            errors.append(f"unknown victim policy {self.policy!r}")
        if Scheme.AWGN in self.schemes or self.scheme is Scheme.AWGN:
            errors.append("victims transmit BPSK or QPSK only")
        lo, hi = self.snr_range_db
        if lo > hi:
            errors.append("snr range is reversed")
        if self.policy == "adaptive" and not lo <= self.snr_db <= hi:
            errors.append("adaptive victim starts outside its snr range")
        if self.scheme_probs is not None:
            p = np.asarray(self.scheme_probs, dtype=float)
            if len(p) != len(self.schemes) or np.any(p < 0) or not math.isclose(p.sum(), 1.0):
                errors.append("scheme_probs must be a distribution over schemes")
        if self.adapt_window < 1:
            errors.append("adapt_window must be positive")
        if self.rule not in ("redraw", "step"):
            errors.append(f"unknown adaptation rule {self.rule!r}")
        if self.n_symbols < 1:
            errors.append("n_symbols must be positive")
        return errors

    @property
    def snr(self) -> float:
        return db_to_lin(self.snr_db)

    def scheme_distribution(self) -> tuple[tuple, np.ndarray]:
        if self.scheme_probs is None:
            return self.schemes, np.full(len(self.schemes), 1.0 / len(self.schemes))
        return self.schemes, np.asarray(self.scheme_probs, dtype=float)

    def state_nodes(self) -> list[tuple[Scheme, float, float]]:
        """(scheme, snr_linear, probability) nodes of the per-step victim state law."""
        if self.policy != "iid":
            return [(self.scheme, self.snr, 1.0)]
        schemes, probs = self.scheme_distribution()
        lo, hi = self.snr_range_db
        if hi == lo:
            snr_nodes, snr_w = np.array([lo]), np.array([1.0])
        else:
            x, w = np.polynomial.legendre.leggauss(SNR_NODES)
            snr_nodes = lo + (hi - lo) * (x + 1) / 2
            snr_w = w / 2
        return [
            (s, db_to_lin(v), p * wv)
            for s, p in zip(schemes, probs)
            for v, wv in zip(snr_nodes, snr_w)
        ]

    def draw_state(self, rng: np.random.Generator) -> tuple[Scheme, float]:
        if self.policy != "iid":
            return self.scheme, self.snr
        schemes, probs = self.scheme_distribution()
        scheme = schemes[rng.choice(len(schemes), p=probs)] if len(schemes) > 1 else schemes[0]
        lo, hi = self.snr_range_db
        return scheme, db_to_lin(rng.uniform(lo, hi))


@dataclass(frozen=True)
class Feedback:
    acks: int
    nacks: int
    per_estimate: float
    ser_estimate: float
    reward: float
    ser_observed: float = 0.0
    saturated: bool = False


# -- error-rate kernels -----------------------------------------------------

@lru_cache(maxsize=200_000)
def _ser_coherent(victim: Scheme, snr: float, jammer: Scheme, jnr: float, rho: float) -> float:
    return analytic.ser_numeric(analytic.SerQuery(victim, jammer, snr, jnr, rho, True))


def ser_at_phase(victim: Scheme, snr: float, action: JammerAction, phase: float) -> float:
    jammed = analytic.ser_given_phase(victim, action.scheme, snr, action.peak_jnr, phase)
    clean = analytic.ser_given_phase(victim, Scheme.BPSK, snr, 0.0)
    return float(action.rho * jammed + (1.0 - action.rho) * clean)


def phase_nodes(coherent: bool) -> np.ndarray:
    if coherent:
        return np.zeros(1)
    return 2.0 * math.pi * np.arange(analytic.PHASE_NODES) / analytic.PHASE_NODES


def grid_ser(victim: Scheme, snr: float, codes, jnr, rho, coherent: bool) -> np.ndarray:
    """SER for many arms at once; shape (n_arms, n_phase_nodes)."""
    codes = np.asarray(codes)
    jnr = np.asarray(jnr, dtype=float)
    rho = np.asarray(rho, dtype=float)
    phases = phase_nodes(coherent)
    out = np.empty((codes.size, phases.size))
    clean = float(analytic.ser_given_phase(victim, Scheme.BPSK, snr, 0.0))
    for code in np.unique(codes):
        sel = codes == code
        scheme = SCHEMES_BY_CODE[int(code)]
        peak = (jnr[sel] / rho[sel])[:, None]
        jammed = analytic.ser_given_phase(victim, scheme, snr, peak, phases[None, :])
        out[sel] = rho[sel][:, None] * jammed + (1.0 - rho[sel][:, None]) * clean
    return out


def _binom_pmf(k: int, p: np.ndarray) -> np.ndarray:
    """Binomial(k, p) pmf rows for a vector of p; exact at p = 0 and 1."""
    c = np.arange(k + 1)
    coef = np.array([math.comb(k, i) for i in c], dtype=float)
    p = np.clip(p, 0.0, 1.0)[:, None]
    return coef * p**c * (1.0 - p) ** (k - c)


def _hinge_binomial(n: int, p, c: float):
    """E[max(X / n - c, 0)] for X ~ Binomial(n, p), vectorized in p."""
    k = math.floor(c * n) + 1  # smallest count with X / n > c
    p = np.asarray(p, dtype=float)
    upper_mass = stats.binom.sf(k - 1, n, p)
    upper_first_moment = p * stats.binom.sf(k - 2, n - 1, p) if n > 1 else p * (k <= 1)
    return upper_first_moment - c * upper_mass


def expected_rewards(
    victims: Sequence[VictimProfile],
    weights: Sequence[float],
    spec: RewardSpec,
    codes,
    jnr,
    rho,
    *,
    coherent: bool = True,
    packets_per_step: int = 1,
) -> np.ndarray:
    """Expected per-step reward of each arm against the victims' current state law."""
    jnr = np.asarray(jnr, dtype=float)
    n_arms = jnr.size
    k = packets_per_step
    weights = np.asarray(weights, dtype=float)

    if spec.kind == "thresholded-ser" and len(victims) > 1:
        raise ValueError("thresholded-ser rewards support a single victim")

    mean_ser = np.zeros(n_arms)
    mean_per = np.zeros(n_arms)
    count_pmfs = []
    hinge_ser = np.zeros(n_arms)
    for v in victims:
        pmf = np.zeros((n_arms, k + 1))
        for scheme, snr, prob in v.state_nodes():
            ser = grid_ser(scheme, snr, codes, jnr, rho, coherent)
            per_phase = analytic.per_from_ser(ser, v.n_symbols, v.error_rule)
            per = np.atleast_2d(per_phase).mean(axis=1)
            mean_ser += prob * ser.mean(axis=1) * _w(weights, victims, v)
            mean_per += prob * per * _w(weights, victims, v)
            if spec.kind == "thresholded-per":
                pmf += prob * _binom_pmf(k, per)
            if spec.kind == "thresholded-ser":
                h = _hinge_binomial(k * v.n_symbols, ser, spec.target)
                hinge_ser += prob * np.atleast_2d(h).mean(axis=1)
        count_pmfs.append(pmf)

    if spec.kind == "raw-ser":
        return mean_ser
    if spec.kind == "raw-per":
        return mean_per
    if spec.kind == "thresholded-ser":
        return hinge_ser / jnr
    # thresholded-per: enumerate NACK counts at every victim
    total = np.zeros(n_arms)
    for counts in itertools.product(range(k + 1), repeat=len(victims)):
        prob = np.ones(n_arms)
        for pmf, c in zip(count_pmfs, counts):
            prob = prob * pmf[:, c]
        combined = float(np.dot(weights, np.asarray(counts) / k))
        total += prob * max(combined - spec.target, 0.0)
    return total / jnr


def _w(weights, victims, v):
    return weights[[id(x) for x in victims].index(id(v))]


# -- one step of feedback ---------------------------------------------------

def _packet_errors(profile: VictimProfile, scheme: Scheme, snr: float, action: JammerAction,
                   fidelity: str, coherent: bool, rng, streams=None) -> int:
    n = profile.n_symbols
    if fidelity == "symbol":
        channel = ChannelParams(snr, "coherent" if coherent else "random")
        outcome = simulate_packet(scheme, channel, action, n, profile.error_rule, streams or rng)
        return outcome.symbol_errors
    if coherent or action.scheme is Scheme.AWGN:
        ser = _ser_coherent(scheme, snr, action.scheme, action.jnr, action.rho)
    else:
        ser = ser_at_phase(scheme, snr, action, rng.uniform(0.0, 2.0 * math.pi))
    return int(rng.binomial(n, min(max(ser, 0.0), 1.0)))


def _feedback(nacks: int, packets: int, ser_obs: float, n_symbols: int, spec: RewardSpec, jnr: float) -> Feedback:
    per = nacks / packets
    saturated = per >= 1.0
    ser_est = 1.0 if saturated else float(-math.expm1(math.log1p(-per) / n_symbols))
    return Feedback(packets - nacks, nacks, per, ser_est, spec.value(per, ser_obs, jnr), ser_obs, saturated)


def step(profile: VictimProfile, action: JammerAction, fidelity: str, spec: RewardSpec,
         packets_per_step: int, rng: np.random.Generator, *, coherent: bool = True) -> Feedback:
    """Play ``action`` against one victim for ``packets_per_step`` packets."""
    if packets_per_step < 1:
        raise ValueError("packets_per_step must be at least 1")
    if fidelity not in FIDELITIES:
        raise ValueError(f"unknown fidelity {fidelity!r}")
    scheme, snr = profile.draw_state(rng)
    min_err = profile.error_rule.min_errors(profile.n_symbols)
    nacks = 0
    errors = 0
    for _ in range(packets_per_step):
        e = _packet_errors(profile, scheme, snr, action, fidelity, coherent, rng)
        errors += e
        nacks += e >= min_err
    ser_obs = errors / (packets_per_step * profile.n_symbols)
    return _feedback(nacks, packets_per_step, ser_obs, profile.n_symbols, spec, action.jnr)


def adaptive_update(profile: VictimProfile, recent_per_history: Sequence[float],
                    rng: np.random.Generator) -> VictimProfile:
    """Apply one adaptation decision from the PER seen over the last window."""
    if profile.policy != "adaptive":
        raise ValueError("only adaptive victims adapt")
    windowed = float(np.mean(recent_per_history)) if len(recent_per_history) else 0.0
    lo, hi = profile.snr_range_db
    fire = profile.trigger is None or windowed > profile.trigger
    if profile.rule == "redraw":
        if not fire:
            return profile
        return replace(profile, snr_db=float(rng.uniform(lo, hi)))
    # step rule: raise power when jammed, back off otherwise
    delta = profile.step_db if fire else -profile.step_db
    return replace(profile, snr_db=float(min(max(profile.snr_db + delta, lo), hi)))


def multi_victim_step(profiles: Sequence[VictimProfile], action: JammerAction, weights: Sequence[float],
                      spec: RewardSpec, fidelity: str, rng: np.random.Generator, *,
                      packets_per_step: int = 1, coherent: bool = True) -> Feedback:
    """Jam several victims at the same JNR and pay on their weighted PER."""
    if not profiles:
        raise ValueError("need at least one victim")
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(profiles) or np.any(weights < 0) or not math.isclose(weights.sum(), 1.0):
        raise ValueError("weights must be a probability vector over victims")
    fbs = [step(p, action, fidelity, RewardSpec("raw-per"), packets_per_step, rng, coherent=coherent)
           for p in profiles]
    per = float(np.dot(weights, [f.per_estimate for f in fbs]))
    ser_obs = float(np.dot(weights, [f.ser_observed for f in fbs]))
    n_sym = profiles[0].n_symbols
    saturated = per >= 1.0
    ser_est = 1.0 if saturated else float(-math.expm1(math.log1p(-per) / n_sym))
    return Feedback(
        sum(f.acks for f in fbs), sum(f.nacks for f in fbs), per, ser_est,
        spec.value(per, ser_obs, action.jnr), ser_obs, saturated,
    )


# -- stateful environment ---------------------------------------------------

@dataclass(frozen=True)
class ActionSpace:
    """The continuous box the jammer searches, in linear JNR."""

    schemes: tuple = (Scheme.AWGN, Scheme.BPSK, Scheme.QPSK)
    jnr_min: float = 1.0
    jnr_max: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))
        if not self.schemes:
            raise ValueError("need at least one jammer scheme")
        if self.jnr_min < 1.0:
            raise ValueError("jnr_min must be at least 1 (0 dB)")
        if self.jnr_max < self.jnr_min:
            raise ValueError("jnr range is reversed")


class JammingEnvironment:
    """Victims plus feedback channel as seen by one learning run.

    ``state_version`` bumps whenever the expected reward of any arm can have
    changed, so callers can cache :meth:`expected_rewards` between bumps.
    """

    def __init__(
        self,
        victims: Sequence[VictimProfile],
        reward: RewardSpec,
        *,
        weights: Optional[Sequence[float]] = None,
        fidelity: str = "analytic",
        packets_per_step: int = 1,
        coherent: bool = True,
        seed: int = 0,
        space: Optional[ActionSpace] = None,
        oracle_grid_m: int = 100,
    ):
        if not victims:
            raise ValueError("need at least one victim")
        if fidelity not in FIDELITIES:
            raise ValueError(f"unknown fidelity {fidelity!r}")
        self.victims = list(victims)
        self.weights = (np.full(len(victims), 1.0 / len(victims)) if weights is None
                        else np.asarray(weights, dtype=float))
        if len(self.weights) != len(self.victims) or not math.isclose(self.weights.sum(), 1.0):
            raise ValueError("weights must be a probability vector over victims")
        self.reward = reward
        self.fidelity = fidelity
        self.packets_per_step = packets_per_step
        self.coherent = coherent
        self.seed = seed
        self.space = space or ActionSpace()
        self.oracle_grid_m = oracle_grid_m
        self.rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xE17,)))
        self.t = 0
        self.packet_index = 0
        self.state_version = 0
        self._per_history = [[] for _ in self.victims]
        self._cache: dict = {}
        self._min_err = [v.error_rule.min_errors(v.n_symbols) for v in self.victims]

    # state ---------------------------------------------------------------
    def state_key(self) -> tuple:
        return tuple((v.policy, v.scheme, v.snr_db) if v.policy != "iid" else ("iid",) for v in self.victims)

    def expected_rewards(self, codes, jnr, rho) -> np.ndarray:
        return expected_rewards(self.victims, self.weights, self.reward, codes, jnr, rho,
                                coherent=self.coherent, packets_per_step=self.packets_per_step)

    def expected_reward(self, action: JammerAction) -> float:
        key = ("arm", self.state_key(), action)
        if key not in self._cache:
            self._cache[key] = float(self.expected_rewards([action.scheme.code], [action.jnr], [action.rho])[0])
        return self._cache[key]

    def oracle(self, grid_m: Optional[int] = None):
        """Best arm of an M-point grid over the action space at the current state."""
        from .jb import ActionGrid

        m = grid_m or self.oracle_grid_m
        key = ("oracle", self.state_key(), m)
        if key not in self._cache:
            grid = ActionGrid(self.space.schemes, m, self.space.jnr_min, self.space.jnr_max)
            values = self.expected_rewards(grid.codes, grid.jnr, grid.rho)
            best = int(np.argmax(values))
            self._cache[key] = (values, best)
        return self._cache[key]

    def oracle_best(self) -> float:
        values, best = self.oracle()
        return float(values[best])

    # dynamics -------------------------------------------------------------
    def step(self, action: JammerAction) -> Feedback:
        k = self.packets_per_step
        pers = []
        sers = []
        for i, v in enumerate(self.victims):
            scheme, snr = v.draw_state(self.rng)
            nacks = 0
            errors = 0
            for _ in range(k):
                streams = packet_rngs(self.seed, self.packet_index) if self.fidelity == "symbol" else None
                self.packet_index += 1
                e = _packet_errors(v, scheme, snr, action, self.fidelity, self.coherent, self.rng, streams)
                errors += e
                nacks += e >= self._min_err[i]
            pers.append(nacks / k)
            sers.append(errors / (k * v.n_symbols))
            self._per_history[i].append(nacks / k)
        self.t += 1
        self._adapt()
        if len(self.victims) == 1:
            per, ser_obs = pers[0], sers[0]
        else:
            per = float(np.dot(self.weights, pers))
            ser_obs = float(np.dot(self.weights, sers))
        nacks_total = int(round(sum(pers) * k))
        saturated = per >= 1.0
        n_sym = self.victims[0].n_symbols
        ser_est = 1.0 if saturated else -math.expm1(math.log1p(-per) / n_sym)
        return Feedback(len(self.victims) * k - nacks_total, nacks_total, per, ser_est,
                        self.reward.value(per, ser_obs, action.jnr), ser_obs, saturated)

    def _adapt(self) -> None:
        changed = False
        for i, v in enumerate(self.victims):
            if v.policy != "adaptive" or self.t % v.adapt_window:
                continue
            new = adaptive_update(v, self._per_history[i], self.rng)
            self._per_history[i] = []
            if new.snr_db != v.snr_db:
                self.victims[i] = new
                changed = True
        if changed:
            self.state_version += 1
