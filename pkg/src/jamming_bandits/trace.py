"""Per-step record of a learning run."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .phy import SCHEMES_BY_CODE, JammerAction, lin_to_db

CSV_HEADER = ("t", "scheme", "jnr_db", "rho", "reward", "per_est", "ser_est", "oracle_best", "cum_regret")


def fmt(x: float) -> str:
    """Deterministic, round-trippable float text."""
    return repr(float(x))


@dataclass
class RegretTrace:
    """Column arrays, one entry per step.

    ``expected`` is the analytic mean reward of the arm actually played at
    that step and ``oracle_best`` the grid-oracle best at the victim's
    state, so ``cum_regret`` is a cumulative sum of expected gaps.
    """

    t: np.ndarray
    arm: np.ndarray
    scheme: np.ndarray
    jnr: np.ndarray
    rho: np.ndarray
    reward: np.ndarray
    per_est: np.ndarray
    ser_est: np.ndarray
    expected: np.ndarray
    oracle_best: np.ndarray
    cum_regret: np.ndarray
    round_index: np.ndarray
    m: np.ndarray

    def __len__(self):
        return len(self.t)

    @classmethod
    def empty(cls, n: int) -> "RegretTrace":
        ints = {"t", "arm", "scheme", "round_index", "m"}
        return cls(**{f.name: np.zeros(n, dtype=np.int64 if f.name in ints else float) for f in fields(cls)})

    def truncated(self, n: int) -> "RegretTrace":
        return RegretTrace(**{f.name: getattr(self, f.name)[:n].copy() for f in fields(self)})

    def action(self, i: int) -> JammerAction:
        return JammerAction(SCHEMES_BY_CODE[int(self.scheme[i])], float(self.jnr[i]), float(self.rho[i]))

    def round_slice(self, round_index: int) -> slice:
        idx = np.flatnonzero(self.round_index == round_index)
        if idx.size == 0:
            raise ValueError(f"no steps in round {round_index}")
        return slice(int(idx[0]), int(idx[-1]) + 1)

    def last_complete_round(self) -> int:
        """Index of the last round that ran to its nominal length (2**k steps)."""
        last = int(self.round_index[-1])
        sl = self.round_slice(last)
        if sl.stop - sl.start == 2**last or last == 0:
            return last
        return last - 1

    def modal_action(self, round_index: Optional[int] = None) -> JammerAction:
        """Most played action in a round (lowest arm index on ties)."""
        if round_index is None:
            round_index = self.last_complete_round()
        sl = self.round_slice(round_index)
        arms = self.arm[sl]
        counts = np.bincount(arms)
        best_arm = int(np.argmax(counts))
        i = sl.start + int(np.flatnonzero(arms == best_arm)[0])
        return self.action(i)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        jnr_db = lin_to_db(self.jnr)
        for i in range(len(self)):
            w.writerow((
                int(self.t[i]), SCHEMES_BY_CODE[int(self.scheme[i])].value, fmt(jnr_db[i]), fmt(self.rho[i]),
                fmt(self.reward[i]), fmt(self.per_est[i]), fmt(self.ser_est[i]),
                fmt(self.oracle_best[i]), fmt(self.cum_regret[i]),
            ))
        return buf.getvalue()
