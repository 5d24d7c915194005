"""Run configured experiments, score them against the grid oracle, write results."""
from __future__ import annotations

import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bounds
from .config import ExperimentConfig
from .environment import JammingEnvironment
from .jb import (
    ActionGrid,
    compute_m,
    epsilon_greedy_run,
    fixed_action_run,
    jb_drifting_run,
    jb_run,
    round_resolution,
)
from .phy import JammerAction, Scheme, lin_to_db
from .trace import RegretTrace, fmt


def make_environment(config: ExperimentConfig, seed: int) -> JammingEnvironment:
    return JammingEnvironment(
        config.victims, config.reward, weights=config.weights, fidelity=config.fidelity,
        packets_per_step=config.packets_per_step, coherent=config.coherent, seed=seed,
        space=config.space, oracle_grid_m=config.oracle_grid_m,
    )


def _policy_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xA1,)))


def run_seed(config: ExperimentConfig, seed: int, checkpoint: Optional[str] = None) -> RegretTrace:
    env = make_environment(config, seed)
    algo = config.algorithm
    common = dict(space=config.space, fixed_m=config.fixed_m, arm_budget=config.arm_budget, checkpoint=checkpoint)
    if algo == "jb-ucb1":
        return jb_run(env, config.horizon, config.holder, "ucb1", **common)
    if algo == "jb-elim":
        return jb_run(env, config.horizon, config.holder, "ucb-improved", **common)
    if algo == "jb-drifting":
        return jb_drifting_run(env, config.horizon, config.holder, config.window_w, **common)
    if algo == "epsilon-greedy":
        return epsilon_greedy_run(env, config.horizon, config.epsilon_m, config.epsilon0,
                                  _policy_rng(seed), config.space)
    if algo == "fixed-awgn":
        return fixed_action_run(env, config.horizon, JammerAction(Scheme.AWGN, config.space.jnr_max, 1.0))
    raise ValueError(f"unknown algorithm {algo!r}")


@dataclass
class OracleResult:
    grid: ActionGrid
    values: np.ndarray
    best: int

    @property
    def best_action(self) -> JammerAction:
        return self.grid.action(self.best)

    @property
    def best_value(self) -> float:
        return float(self.values[self.best])


def grid_oracle(config: ExperimentConfig, grid_m: int) -> OracleResult:
    """Expected reward of every arm of an M-grid at the victims' initial state law."""
    if grid_m < 2:
        raise ValueError("grid_m must be at least 2")
    env = make_environment(config, 0)
    grid = ActionGrid.over(config.space, grid_m)
    values = grid.expected(env)
    return OracleResult(grid, values, int(np.argmax(values)))


def _action_dict(a: JammerAction) -> dict:
    return {"scheme": a.scheme.value, "jnr_db": lin_to_db(a.jnr), "rho": a.rho}


def regret_slope(trace: RegretTrace) -> Optional[float]:
    """Log-log slope of cumulative regret across the final two complete rounds."""
    last = trace.last_complete_round()
    if last < 2:
        return None
    t1, t2 = 2 ** (last - 1) - 1, 2 ** (last + 1) - 1  # ends of rounds last-2 and last
    r1, r2 = trace.cum_regret[t1 - 1], trace.cum_regret[t2 - 1]
    if r1 <= 0 or r2 <= 0:
        return None
    return math.log(r2 / r1) / math.log(t2 / t1)


def terminal_round_m(config: ExperimentConfig, trace: RegretTrace) -> int:
    return int(trace.m[trace.round_slice(trace.last_complete_round()).start])


def seed_summary(config: ExperimentConfig, seed: int, trace: RegretTrace) -> dict:
    last = trace.last_complete_round()
    sl = trace.round_slice(last)
    m = terminal_round_m(config, trace)
    n_mod = len(config.space.schemes)
    out = {
        "seed": seed,
        "steps": len(trace),
        "terminal_round": last,
        "terminal_m": m,
        "terminal_modal_arm": _action_dict(trace.modal_action(last)),
        "terminal_mean_reward": float(np.mean(trace.reward[sl])),
        "terminal_mean_expected_reward": float(np.mean(trace.expected[sl])),
        "final_cum_regret": float(trace.cum_regret[-1]),
        "regret_slope": regret_slope(trace),
    }
    if config.algorithm.startswith("jb") and (sl.stop - sl.start) >= 2:
        env = make_environment(config, seed)
        grid = ActionGrid.over(config.space, m)
        report = bounds.suboptimality_audit(trace.arm[sl], grid.expected(env),
                                            config.holder.restriction_delta, sl.stop - sl.start)
        out["audit"] = report.to_dict()
    out["bounds"] = bounds.bound_overlays(len(trace), config.holder, n_mod, m)
    return out


def summarize(config: ExperimentConfig, traces: dict) -> dict:
    if not traces:
        raise ValueError("no traces to summarize")
    per_seed = [seed_summary(config, s, tr) for s, tr in traces.items()]
    modal = Counter(json.dumps(p["terminal_modal_arm"], sort_keys=True) for p in per_seed)
    arm, count = modal.most_common(1)[0]
    ends = [2**k - 1 for k in range(1, 64) if 2**k - 1 <= config.horizon]
    mean_regret = [float(np.mean([tr.cum_regret[t - 1] for tr in traces.values()])) for t in ends]
    return {
        "name": config.name,
        "algorithm": config.algorithm,
        "horizon": config.horizon,
        "seeds": list(traces),
        "holder": {"constant_L": config.holder.constant_L, "exponent_alpha": config.holder.exponent_alpha,
                   "restriction_delta": config.holder.restriction_delta},
        "modal_arm": json.loads(arm),
        "modal_arm_fraction": count / len(per_seed),
        "mean_terminal_reward": float(np.mean([p["terminal_mean_reward"] for p in per_seed])),
        "mean_final_cum_regret": float(np.mean([p["final_cum_regret"] for p in per_seed])),
        "round_ends": ends,
        "mean_cum_regret_at_round_ends": mean_regret,
        "bounds": bounds.bound_overlays(config.horizon, config.holder, len(config.space.schemes),
                                        compute_m(config.horizon, config.holder)),
        "per_seed": per_seed,
    }


def _run_one(args):
    config, seed, ckpt = args
    return seed, run_seed(config, seed, ckpt)


def run_experiment(config: ExperimentConfig, *, jobs: int = 1, checkpoint_dir: Optional[str] = None):
    """Run every seed; returns ({seed: trace}, summary)."""
    def ckpt(seed):
        if not checkpoint_dir:
            return None
        os.makedirs(checkpoint_dir, exist_ok=True)
        return os.path.join(checkpoint_dir, f"seed_{seed}.ckpt")

    work = [(config, s, ckpt(s)) for s in config.seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_run_one, work))
    else:
        results = dict(map(_run_one, work))
    traces = {s: results[s] for s in config.seeds}
    return traces, summarize(config, traces)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def downsample_points(horizon: int, n: int = 200) -> np.ndarray:
    pts = np.unique(np.round(np.geomspace(1, horizon, n)).astype(int))
    return pts[(pts >= 1) & (pts <= horizon)]


def emit_outputs(traces: dict, summary: dict, out_dir: str) -> list:
    """Write per-seed trace.csv, summary.json and a downsampled regret table."""
    if not traces:
        raise ValueError("no traces to write")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for seed, tr in traces.items():
        d = os.path.join(out_dir, f"seed_{seed}")
        os.makedirs(d, exist_ok=True)
        path = os.path.join(d, "trace.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(tr.to_csv())
        written.append(path)
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)

    horizon = min(len(tr) for tr in traces.values())
    pts = downsample_points(horizon)
    mean = np.mean([tr.cum_regret[pts - 1] for tr in traces.values()], axis=0)
    path = os.path.join(out_dir, "regret_curve.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,mean_cum_regret,mean_avg_regret\n")
        for t, r in zip(pts, mean):
            fh.write(f"{int(t)},{fmt(r)},{fmt(r / t)}\n")
    written.append(path)
    return written
