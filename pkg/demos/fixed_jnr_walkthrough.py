"""Watch the doubling-trick learner find the best pulsed jammer.

A BPSK victim at 20 dB SNR, the jammer's average power pinned at 10 dB JNR.
Each round doubles in length and refines the pulse-ratio grid; the printout
shows which arm each round settled on next to the best arm of that grid.

    python3 demos/fixed_jnr_walkthrough.py [horizon] [seed]
"""
import sys

import numpy as np

from jamming_bandits.harness import grid_oracle, make_environment, run_seed
from jamming_bandits.jb import ActionGrid
from jamming_bandits.presets import load_preset


def main(horizon=2**15, seed=0):
    cfg = load_preset("fig3")
    cfg.horizon = horizon
    env = make_environment(cfg, seed)
    trace = run_seed(cfg, seed)

    print(f"{'round':>5} {'steps':>6} {'M':>3}  {'played most':<22} {'grid best':<22} {'mean reward':>11}")
    for k in range(int(trace.round_index[-1]) + 1):
        sl = trace.round_slice(k)
        m = int(trace.m[sl.start])
        grid = ActionGrid.over(cfg.space, m)
        best = grid.action(int(np.argmax(grid.expected(env))))
        played = trace.modal_action(k)
        print(f"{k:>5} {sl.stop - sl.start:>6} {m:>3}  {played.scheme.value} rho={played.rho:<12.4f} "
              f"{best.scheme.value} rho={best.rho:<12.4f} {trace.reward[sl].mean():>11.5f}")

    fine = grid_oracle(cfg, 1000)
    print(f"\nfine-grid optimum: {fine.best_action.scheme.value} rho={fine.best_action.rho:.3f} "
          f"SER {fine.best_value:.5f}")
    print(f"cumulative regret after {horizon} steps: {trace.cum_regret[-1]:.2f} "
          f"({trace.cum_regret[-1] / horizon:.5f} per step)")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
