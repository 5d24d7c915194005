"""Closed-form and numerically integrated error rates for the jammed link.

These are the exact expectations of what :mod:`jamming_bandits.phy`
simulates: per-dimension noise variance 1, ML detection that ignores the
jammer, pulsed jamming at peak power ``jnr / rho`` with probability ``rho``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special, stats

from .phy import ErrorRule, Scheme, constellation

SQRT2 = math.sqrt(2.0)

PHASE_NODES = 64
MAX_PHASE_NODES = 4096
QUAD_TOL = 1e-6


class QuadratureError(RuntimeError):
    """Phase averaging failed to reach the requested tolerance."""


class SaturatedFeedbackWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class HolderParams:
    constant_L: float
    exponent_alpha: float = 1.0
    restriction_delta: float = 0.1

    def __post_init__(self):
        if self.constant_L < 0:
            raise ValueError("Hölder constant must be nonnegative")
        if not 0.0 < self.exponent_alpha <= 1.0:
            raise ValueError("Hölder exponent must lie in (0, 1]")
        if self.restriction_delta <= 0:
            raise ValueError("restriction radius must be positive")


@dataclass(frozen=True)
class SerQuery:
    victim_scheme: Scheme
    jammer_scheme: Scheme
    snr: float
    jnr: float
    rho: float = 1.0
    coherent: bool = True

    def __post_init__(self):
        object.__setattr__(self, "victim_scheme", Scheme.parse(self.victim_scheme))
        object.__setattr__(self, "jammer_scheme", Scheme.parse(self.jammer_scheme))
        if self.victim_scheme is Scheme.AWGN:
            raise ValueError("victim must use BPSK or QPSK")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        if self.snr < 0 or self.jnr < 0:
            raise ValueError("snr and jnr must be nonnegative")


def ser_bpsk_on_bpsk(snr, jnr):
    """BPSK victim hit by a coherent, always-on BPSK jammer."""
    a = np.sqrt(snr)
    b = np.sqrt(jnr)
    return 0.25 * (special.erfc((a + b) / SQRT2) + special.erfc((a - b) / SQRT2))


def ser_pulsed(base_ser: Callable, snr, jnr, rho):
    """Mix the jammed and jam-free error rates of a pulsed jammer."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0) or np.any(rho > 1):
        raise ValueError("pulse ratio must lie in (0, 1]")
    jammed = base_ser(snr, np.asarray(jnr, dtype=float) / rho)
    clean = base_ser(snr, np.zeros_like(np.asarray(jnr, dtype=float)))
    out = rho * jammed + (1.0 - rho) * clean
    return float(out) if np.ndim(out) == 0 else out


def _qfunc(x):
    return special.ndtr(-x)


def ser_awgn_jam(victim_scheme: Scheme, snr, jnr):
    """Victim error rate when the jammer just raises the noise floor to 1 + jnr."""
    victim_scheme = Scheme.parse(victim_scheme)
    sd = np.sqrt(1.0 + np.asarray(jnr, dtype=float))
    if victim_scheme is Scheme.BPSK:
        out = 0.5 * special.erfc(np.sqrt(np.asarray(snr, dtype=float) / (2.0 * sd**2)))
    elif victim_scheme is Scheme.QPSK:
        q = _qfunc(np.sqrt(np.asarray(snr, dtype=float) / 2.0) / sd)
        out = 2.0 * q - q * q
    else:
        raise ValueError("victim must use BPSK or QPSK")
    return float(out) if np.ndim(out) == 0 else out


def ser_given_phase(victim_scheme, jammer_scheme, snr, peak_jnr, phase=0.0):
    """Error rate of an always-on jammer at a fixed relative phase.

    The Gaussian noise integral over each half-plane decision region is taken
    in closed form; victim and jammer symbols are averaged exactly.  Inputs
    broadcast against each other.
    """
    victim_scheme = Scheme.parse(victim_scheme)
    jammer_scheme = Scheme.parse(jammer_scheme)
    snr, peak_jnr, phase = np.broadcast_arrays(
        np.asarray(snr, dtype=float), np.asarray(peak_jnr, dtype=float), np.asarray(phase, dtype=float)
    )
    if jammer_scheme is Scheme.AWGN:
        return ser_awgn_jam(victim_scheme, snr, peak_jnr)

    xs = constellation(victim_scheme)
    js = constellation(jammer_scheme)
    # trailing axes: victim symbol, jammer symbol
    sig = np.sqrt(snr)[..., None, None] * xs[:, None]
    jam = (np.sqrt(peak_jnr) * np.exp(1j * phase))[..., None, None] * js[None, :]
    mean = sig + jam
    # per-dimension error probabilities, distance measured toward the true side
    err_re = _qfunc(np.sign(xs.real)[:, None] * mean.real)
    if victim_scheme is Scheme.BPSK:
        err = err_re
    else:
        err_im = _qfunc(np.sign(xs.imag)[:, None] * mean.imag)
        err = err_re + err_im - err_re * err_im
    return err.mean(axis=(-2, -1))


def _phase_average(fn, tol=QUAD_TOL, nodes=PHASE_NODES, max_nodes=MAX_PHASE_NODES):
    """Periodic trapezoid rule in the phase, doubled until two levels agree."""
    def level(n):
        phases = 2.0 * math.pi * np.arange(n) / n
        return np.mean(fn(phases), axis=-1)

    coarse = level(nodes)
    n = nodes
    while True:
        n *= 2
        fine = level(n)
        if np.max(np.abs(fine - coarse)) <= tol:
            return fine
        if n >= max_nodes:
            raise QuadratureError(f"phase average did not settle to {tol:g} with {n} nodes")
        coarse = fine


def ser_numeric(query: SerQuery) -> float:
    """General error rate for any victim/jammer pairing, pulsed and phased."""
    q = query
    if q.jammer_scheme is Scheme.AWGN or q.coherent:
        jammed = ser_given_phase(q.victim_scheme, q.jammer_scheme, q.snr, q.jnr / q.rho)
    else:
        jammed = _phase_average(
            lambda ph: ser_given_phase(q.victim_scheme, q.jammer_scheme, q.snr, q.jnr / q.rho, ph)
        )
    clean = ser_given_phase(q.victim_scheme, Scheme.BPSK, q.snr, 0.0)
    return float(q.rho * jammed + (1.0 - q.rho) * clean)


def per_from_ser(ser, n_symbols: int, rule="threshold:0.1"):
    """Packet error rate when symbol errors are i.i.d. with rate ``ser``."""
    rule = ErrorRule.parse(rule)
    if n_symbols < 1:
        raise ValueError("n_symbols must be at least 1")
    ser = np.clip(np.asarray(ser, dtype=float), 0.0, 1.0)
    if rule.kind == "any":
        # 1 - (1 - s)^n without cancellation for tiny s
        out = -np.expm1(n_symbols * np.log1p(-ser)) if np.all(ser < 1) else 1.0 - (1.0 - ser) ** n_symbols
    else:
        out = stats.binom.sf(rule.min_errors(n_symbols) - 1, n_symbols, ser)
    return float(out) if np.ndim(out) == 0 else out


def ser_from_per(per_estimate: float, n_symbols: int) -> float:
    """Invert the any-error packet rule to recover a symbol error rate."""
    if not 0.0 <= per_estimate <= 1.0:
        raise ValueError("PER estimate must lie in [0, 1]")
    if per_estimate >= 1.0:
        warnings.warn("PER estimate saturated at 1; SER is unidentifiable", SaturatedFeedbackWarning, stacklevel=2)
        return 1.0
    return float(-math.expm1(math.log1p(-per_estimate) / n_symbols))


def holder_constants(snr_max: float, jnr_min: float, restriction_delta: float = 0.1) -> HolderParams:
    """Worst-case Hölder constant for the pulsed-jamming error rate.

    Candidates are the unjammed-term constant 1, the JNR slope
    sqrt(snr_max / 8 pi), the pulse-ratio term erfc(snr_max) / 2, and the
    noise-density slope sqrt(1 / (2 pi jnr_min)); the largest one is used.
    """
    if snr_max <= 0:
        raise ValueError("snr_max must be positive")
    if jnr_min < 1:
        raise ValueError("jnr_min must be at least 1 (0 dB)")
    candidates = (
        1.0,
        math.sqrt(snr_max / (8.0 * math.pi)),
        special.erfc(snr_max) / 2.0,
        math.sqrt(1.0 / (2.0 * math.pi * jnr_min)),
    )
    return HolderParams(max(candidates), 1.0, restriction_delta)
