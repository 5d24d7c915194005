"""Experiment configuration: INI text in, validated ExperimentConfig out.

Example::

    [experiment]
    name = fig3
    algorithm = jb-ucb1
    horizon = 131072
    seeds = 0-29

    [jammer]
    schemes = AWGN, BPSK, QPSK
    jnr_min_db = 10
    jnr_max_db = 10
    reward = raw-ser

    [victim]
    policy = static
    scheme = BPSK
    snr_db = 20

Several victims go in sections ``[victim.1]``, ``[victim.2]``, ... with an
optional ``weight`` key each.  All powers are in dB.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .analytic import HolderParams, holder_constants
from .environment import ActionSpace, FIDELITIES, RewardSpec, VictimProfile
from .phy import ErrorRule, Scheme, db_to_lin

ALGORITHMS = ("jb-ucb1", "jb-elim", "jb-drifting", "epsilon-greedy", "fixed-awgn")


class ConfigError(ValueError):
    """Every problem found in a configuration, not just the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class ExperimentConfig:
    name: str
    algorithm: str
    horizon: int
    seeds: list
    victims: list
    space: ActionSpace
    reward: RewardSpec
    holder: HolderParams
    weights: Optional[list] = None
    fidelity: str = "analytic"
    packets_per_step: int = 1
    coherent: bool = True
    oracle_grid_m: int = 100
    window_w: Optional[int] = None
    epsilon_m: int = 5
    epsilon0: float = 0.9
    fixed_m: Optional[int] = None
    arm_budget: int = 2_000_000
    extra: dict = field(default_factory=dict)

    def scaled(self, scale: float) -> "ExperimentConfig":
        """Shrink horizon, packet length and victim/drift windows together."""
        if not scale > 0:
            raise ConfigError([f"scale must be positive, got {scale}"])
        if scale == 1:
            return self
        s = lambda n: max(1, int(round(n * scale)))  # noqa: E731
        victims = [replace(v, n_symbols=s(v.n_symbols), adapt_window=s(v.adapt_window)) for v in self.victims]
        window = None if self.window_w is None else max(2, 2 * (s(self.window_w) // 2))
        return replace(self, horizon=s(self.horizon), victims=victims, window_w=window)

    def with_seeds(self, seeds) -> "ExperimentConfig":
        return replace(self, seeds=list(seeds))


def _parse_seeds(text: str) -> list:
    seeds = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return seeds


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return float(text)


class _Reader:
    """Typed section access that records failures instead of raising."""

    def __init__(self, cp: configparser.ConfigParser, errors: list):
        self.cp, self.errors = cp, errors

    def get(self, section, key, conv=str, default=None):
        if not self.cp.has_section(section) or not self.cp.has_option(section, key):
            return default
        raw = self.cp.get(section, key)
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            self.errors.append(f"[{section}] {key} = {raw!r}: {exc}")
            return default


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _schemes(text: str) -> tuple:
    return tuple(Scheme.parse(s) for s in text.split(",") if s.strip())


def _victim(r: _Reader, section: str, errors: list) -> Optional[VictimProfile]:
    g = lambda k, conv=str, d=None: r.get(section, k, conv, d)  # noqa: E731
    lo = g("snr_min_db", float, 0.0)
    hi = g("snr_max_db", float, 20.0)
    kwargs = dict(
        policy=g("policy", str, "static").strip().lower(),
        scheme=g("scheme", str, "BPSK"),
        snr_db=g("snr_db", float, 20.0),
        schemes=g("schemes", _schemes, (Scheme.BPSK, Scheme.QPSK)),
        snr_range_db=(lo, hi),
        adapt_window=g("adapt_window", int, 50_000),
        trigger=g("trigger", _opt_float, 0.2),
        rule=g("rule", str, "redraw").strip().lower(),
        step_db=g("step_db", float, 2.0),
        n_symbols=g("n_symbols", int, 10_000),
        error_rule=g("error_rule", str, "threshold:0.1"),
    )
    probs = g("scheme_probs", lambda t: tuple(float(x) for x in t.split(",")), None)
    if probs is not None:
        kwargs["scheme_probs"] = probs
    try:
        kwargs["scheme"] = Scheme.parse(kwargs["scheme"])
        kwargs["error_rule"] = ErrorRule.parse(kwargs["error_rule"])
    except ValueError as exc:
        errors.append(f"[{section}] {exc}")
        return None
    if kwargs["policy"] == "static" and not lo <= kwargs["snr_db"] <= hi:
        errors.append(f"[{section}] snr_db {kwargs['snr_db']} outside [{lo}, {hi}] dB")
    if kwargs["policy"] == "iid" and not (lo >= 0.0 and hi <= 20.0):
        errors.append(f"[{section}] snr range must lie within [0, 20] dB")
    try:
        return VictimProfile(**kwargs)
    except ValueError as exc:
        errors.append(f"[{section}] {exc}")
        return None


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError([str(exc)]) from None
    errors: list = []
    r = _Reader(cp, errors)
    E = "experiment"
    if not cp.has_section(E):
        errors.append("missing [experiment] section")

    name = r.get(E, "name", str, "experiment")
    algorithm = r.get(E, "algorithm", lambda t: t.strip().lower(), "jb-ucb1")
    if algorithm not in ALGORITHMS:
        errors.append(f"[experiment] algorithm {algorithm!r} not one of {', '.join(ALGORITHMS)}")
    horizon = r.get(E, "horizon", int, None)
    if horizon is None:
        errors.append("[experiment] horizon is required")
    elif horizon < 1:
        errors.append(f"[experiment] horizon must be at least 1, got {horizon}")
    seeds = r.get(E, "seeds", _parse_seeds, [0])
    if not seeds:
        errors.append("[experiment] seeds must not be empty")
    fidelity = r.get(E, "fidelity", lambda t: t.strip().lower(), "analytic")
    if fidelity not in FIDELITIES:
        errors.append(f"[experiment] fidelity {fidelity!r} not one of {', '.join(FIDELITIES)}")
    packets = r.get(E, "packets_per_step", int, 1)
    if packets < 1:
        errors.append("[experiment] packets_per_step must be at least 1")
    coherent = r.get(E, "coherent", _bool, True)
    oracle_m = r.get(E, "oracle_grid_m", int, 100)
    if oracle_m < 2:
        errors.append("[experiment] oracle_grid_m must be at least 2")
    window_w = r.get(E, "window_w", int, None)
    if algorithm == "jb-drifting":
        if window_w is None:
            errors.append("[experiment] jb-drifting needs window_w")
        elif window_w < 2 or window_w % 2:
            errors.append("[experiment] window_w must be an even count of at least 2")
    epsilon_m = r.get(E, "epsilon_m", int, 5)
    epsilon0 = r.get(E, "epsilon0", float, 0.9)
    if algorithm == "epsilon-greedy":
        if epsilon_m < 1:
            errors.append("[experiment] epsilon_m must be at least 1")
        if not 0.0 < epsilon0 < 1.0:
            errors.append("[experiment] epsilon0 must lie in (0, 1)")
    fixed_m = r.get(E, "fixed_m", int, None)
    if fixed_m is not None and fixed_m < 1:
        errors.append("[experiment] fixed_m must be at least 1")
    arm_budget = r.get(E, "arm_budget", int, 2_000_000)

    J = "jammer"
    schemes = r.get(J, "schemes", _schemes, (Scheme.AWGN, Scheme.BPSK, Scheme.QPSK))
    jmin = r.get(J, "jnr_min_db", float, 0.0)
    jmax = r.get(J, "jnr_max_db", float, 20.0)
    for label, v in (("jnr_min_db", jmin), ("jnr_max_db", jmax)):
        if not 0.0 <= v <= 20.0:
            errors.append(f"[jammer] {label} = {v} outside [0, 20] dB")
    if jmin > jmax:
        errors.append("[jammer] jnr_min_db exceeds jnr_max_db")
    space = None
    try:
        space = ActionSpace(schemes, db_to_lin(jmin), db_to_lin(jmax))
    except ValueError as exc:
        errors.append(f"[jammer] {exc}")
    reward = None
    try:
        reward = RewardSpec(r.get(J, "reward", lambda t: t.strip().lower(), "raw-ser"),
                            r.get(J, "reward_target", _opt_float, None))
    except ValueError as exc:
        errors.append(f"[jammer] {exc}")

    victim_sections = sorted(s for s in cp.sections() if s == "victim" or s.startswith("victim."))
    if not victim_sections:
        errors.append("at least one [victim] section is required")
    victims, weights = [], []
    for sec in victim_sections:
        v = _victim(r, sec, errors)
        if v is not None:
            victims.append(v)
        weights.append(r.get(sec, "weight", float, None))
    if any(w is not None for w in weights):
        if any(w is None for w in weights):
            errors.append("either every victim has a weight or none does")
            weights = None
        elif not math.isclose(sum(weights), 1.0) or any(w < 0 for w in weights):
            errors.append("victim weights must be nonnegative and sum to 1")
    else:
        weights = None
    if reward is not None and reward.kind == "thresholded-ser" and len(victim_sections) > 1:
        errors.append("thresholded-ser rewards support a single victim")
    if len({v.n_symbols for v in victims}) > 1:
        errors.append("all victims must use the same n_symbols")

    H = "holder"
    snr_max_db = r.get(H, "snr_max_db", float, None)
    if snr_max_db is None:
        snr_max_db = max([v.snr_range_db[1] if v.policy != "static" else v.snr_db for v in victims] or [0.0])
    holder = None
    try:
        base = holder_constants(db_to_lin(snr_max_db), db_to_lin(max(jmin, 0.0)),
                                r.get(H, "restriction_delta", float, 0.1))
        holder = HolderParams(r.get(H, "constant_L", float, base.constant_L),
                              r.get(H, "exponent_alpha", float, 1.0), base.restriction_delta)
    except ValueError as exc:
        errors.append(f"[holder] {exc}")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        name=name, algorithm=algorithm, horizon=horizon, seeds=seeds, victims=victims, space=space,
        reward=reward, holder=holder, weights=weights, fidelity=fidelity, packets_per_step=packets,
        coherent=coherent, oracle_grid_m=oracle_m, window_w=window_w, epsilon_m=epsilon_m,
        epsilon0=epsilon0, fixed_m=fixed_m, arm_budget=arm_budget,
    )


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a config file; OSError propagates for missing files."""
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))
