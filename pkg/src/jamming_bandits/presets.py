"""Named experiment recipes at full scale.

Run them shrunk with ``--scale``; horizon, packet length and the victim and
drift windows all scale together.
"""
from __future__ import annotations

from .config import ExperimentConfig, parse_config

_FIXED_JNR = """
[experiment]
name = {name}
algorithm = jb-ucb1
horizon = 1048576
seeds = 0-29
coherent = {coherent}

[jammer]
schemes = AWGN, BPSK, QPSK
jnr_min_db = 10
jnr_max_db = 10
reward = {reward}

[victim]
policy = static
scheme = {victim}
snr_db = 20
n_symbols = 10000
"""

_PER_TARGET = """
[experiment]
name = {name}
algorithm = {algorithm}
horizon = 1048576
seeds = 0-29
{extra}

[jammer]
schemes = AWGN, BPSK, QPSK
jnr_min_db = 0
jnr_max_db = 20
reward = thresholded-per
reward_target = 0.8

{victims}
"""

PRESETS = {
    "fig3": _FIXED_JNR.format(name="fig3", coherent="true", reward="raw-ser", victim="BPSK"),
    "fig4": _FIXED_JNR.format(name="fig4", coherent="true", reward="raw-ser", victim="QPSK"),
    "fig5": _FIXED_JNR.format(name="fig5", coherent="false", reward="raw-ser", victim="BPSK"),
    "fig6": _FIXED_JNR.format(name="fig6", coherent="true", reward="raw-per", victim="BPSK"),
    "fig9": _PER_TARGET.format(
        name="fig9", algorithm="jb-elim", extra="",
        victims="[victim]\npolicy = static\nscheme = BPSK\nsnr_db = 20\n",
    ),
    "fig11": _PER_TARGET.format(
        name="fig11", algorithm="jb-drifting", extra="window_w = 25000",
        victims="[victim]\npolicy = adaptive\nscheme = BPSK\nsnr_db = 10\nadapt_window = 50000\ntrigger = none\n",
    ),
    "fig12": _PER_TARGET.format(
        name="fig12", algorithm="jb-ucb1", extra="",
        victims="[victim.1]\nscheme = BPSK\nsnr_db = 15\n\n[victim.2]\nscheme = BPSK\nsnr_db = 5\n",
    ),
    "fig13": _PER_TARGET.format(
        name="fig13", algorithm="jb-ucb1", extra="",
        victims="[victim.1]\nscheme = QPSK\nsnr_db = 5\n\n[victim.2]\nscheme = BPSK\nsnr_db = 15\n",
    ),
}

# Reference arm values for each recipe at full scale.
REPORTED = {
    "fig3": {"scheme": "BPSK", "rho": 0.078},
    "fig4": {"scheme": "QPSK", "rho": 0.087},
    "fig5": {"scheme": "BPSK", "rho": 0.051, "oracle_rho": 0.06},
    "fig6": {"scheme": "BPSK", "rho": 0.23},
    "fig9": {"scheme": "BPSK", "jnr_db": 15.0, "rho": 0.22},
    "fig12": {"scheme": "BPSK", "jnr_db": 13.0, "rho": 0.46},
    "fig13": {"scheme": "BPSK", "jnr_db": 11.25, "rho": 0.25},
}


def preset_names() -> list:
    return sorted(PRESETS)


def preset_text(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(preset_names())}") from None


def load_preset(name: str, scale: float = 1.0) -> ExperimentConfig:
    return parse_config(preset_text(name), source=f"preset:{name}").scaled(scale)
