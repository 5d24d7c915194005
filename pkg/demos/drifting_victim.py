"""A victim that keeps changing its transmit power.

Every ``period`` steps the victim redraws its SNR.  Plain JB keeps trusting
statistics gathered under the old power; the drifting variant restarts its
estimates every half frame so stale data ages out.  The table shows the
share of the per-segment oracle reward each learner collects once one frame
has passed after a change.  With 2000-step segments and several hundred
arms per round both stay far from the oracle; the restarts buy only a
little.

    python3 demos/drifting_victim.py [seed]
"""
import sys

import numpy as np

from jamming_bandits.harness import run_seed
from jamming_bandits.presets import load_preset


def recovery(trace, period, frame):
    out = []
    for change in range(period, len(trace) - period + 1, period):
        sl = slice(change + frame, change + period)
        out.append(trace.expected[sl].mean() / trace.oracle_best[sl].mean())
    return np.array(out)


def main(seed=0):
    drifting = load_preset("fig11", 0.04)
    plain = load_preset("fig11", 0.04)
    plain.algorithm = "jb-ucb1"
    period, frame = drifting.victims[0].adapt_window, drifting.window_w
    print(f"horizon {drifting.horizon}, victim changes every {period} steps, frame {frame}")

    rows = {name: recovery(run_seed(cfg, seed), period, frame)
            for name, cfg in (("plain JB", plain), ("drifting JB", drifting))}
    print(f"{'segment':>7} " + " ".join(f"{n:>12}" for n in rows))
    for i in range(len(rows["plain JB"])):
        print(f"{i + 1:>7} " + " ".join(f"{r[i]:>12.2f}" for r in rows.values()))
    print(f"{'mean':>7} " + " ".join(f"{r.mean():>12.2f}" for r in rows.values()))


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:2]))
