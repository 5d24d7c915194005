"""Symbol-level model of a victim link under pulsed jamming.

Everything works on the sampled, matched-filtered symbol stream::

    y_k = sqrt(snr) x_k + 1{jam_k} sqrt(jnr / rho) e^{i phi} j_k + n_k

with ``n_k`` circular complex Gaussian noise of unit variance per real
dimension.  Powers are linear ratios to that per-dimension noise variance.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

SQRT_HALF = math.sqrt(0.5)

ROLES = ("victim", "jammer", "noise", "phase", "pulse")


class Scheme(str, enum.Enum):
    AWGN = "AWGN"
    BPSK = "BPSK"
    QPSK = "QPSK"

    @classmethod
    def parse(cls, value: Union[str, "Scheme"]) -> "Scheme":
        if isinstance(value, Scheme):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown signaling scheme {value!r}") from None

    @property
    def code(self) -> int:
        return _SCHEME_CODES[self]


_SCHEME_CODES = {Scheme.AWGN: 0, Scheme.BPSK: 1, Scheme.QPSK: 2}
SCHEMES_BY_CODE = {v: k for k, v in _SCHEME_CODES.items()}

# Listing order doubles as the ML tie-break order: ties go to the lowest index.
_CONSTELLATIONS = {
    Scheme.BPSK: np.array([1.0 + 0j, -1.0 + 0j]),
    Scheme.QPSK: SQRT_HALF * np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]),
}


def constellation(scheme: Scheme) -> np.ndarray:
    """Unit-energy constellation points of a linear modulation."""
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.AWGN:
        raise ValueError("AWGN noise jamming has no constellation")
    return _CONSTELLATIONS[scheme].copy()


@dataclass(frozen=True)
class ErrorRule:
    """When a packet counts as lost.

    ``kind="any"`` fails a packet on its first symbol error;
    ``kind="threshold"`` needs at least ``ceil(fraction * n_symbols)`` errors.
    """

    kind: str = "threshold"
    fraction: float = 0.1

    def __post_init__(self):
        if self.kind not in ("any", "threshold"):
            raise ValueError(f"error rule kind must be 'any' or 'threshold', got {self.kind!r}")
        if self.kind == "threshold" and not 0.0 < self.fraction <= 1.0:
            raise ValueError("threshold fraction must lie in (0, 1]")

    @classmethod
    def parse(cls, text: Union[str, "ErrorRule"]) -> "ErrorRule":
        if isinstance(text, ErrorRule):
            return text
        text = str(text).strip().lower()
        if text in ("any", "any-error"):
            return cls("any")
        if text.startswith("threshold"):
            _, _, frac = text.partition(":")
            return cls("threshold", float(frac) if frac else 0.1)
        raise ValueError(f"cannot parse error rule {text!r}")

    def min_errors(self, n_symbols: int) -> int:
        """Smallest symbol-error count that fails a packet."""
        if self.kind == "any":
            return 1
        # round() guards against 0.1 * 30 = 3.0000000000000004 style ceil bumps
        return max(1, math.ceil(round(self.fraction * n_symbols, 9)))

    def __str__(self):
        return "any" if self.kind == "any" else f"threshold:{self.fraction:g}"


@dataclass(frozen=True)
class ChannelParams:
    snr: float
    phase_offset: str = "coherent"  # or "random"

    def __post_init__(self):
        if self.snr < 0:
            raise ValueError("snr must be nonnegative")
        if self.phase_offset not in ("coherent", "random"):
            raise ValueError("phase_offset must be 'coherent' or 'random'")

    @property
    def coherent(self) -> bool:
        return self.phase_offset == "coherent"


@dataclass(frozen=True)
class JammerAction:
    """One arm: signaling scheme, average JNR (linear) and pulse ratio."""

    scheme: Scheme
    jnr: float
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"pulse ratio must lie in (0, 1], got {self.rho}")
        if self.jnr < 0:
            raise ValueError("jnr must be nonnegative")

    @property
    def peak_jnr(self) -> float:
        return self.jnr / self.rho

    @property
    def jnr_db(self) -> float:
        return lin_to_db(self.jnr)


@dataclass(frozen=True)
class PacketOutcome:
    n_symbols: int
    symbol_errors: int
    packet_error: bool

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.n_symbols


def db_to_lin(db):
    out = np.power(10.0, np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def lin_to_db(lin):
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.asarray(lin, dtype=float))
    return float(out) if out.ndim == 0 else out


def packet_rngs(seed: int, packet_index: int) -> dict[str, np.random.Generator]:
    """Independent per-role streams for one packet.

    Keyed on (seed, packet index, role) so packets can be simulated in any
    order or in parallel without changing a single draw.
    """
    return {
        role: np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(packet_index, i)))
        for i, role in enumerate(ROLES)
    }


RngLike = Union[np.random.Generator, Mapping[str, np.random.Generator]]


def _stream(rng: RngLike, role: str) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng[role]


def modulate(scheme: Scheme, count: int, rng: np.random.Generator, *, victim: bool = False) -> np.ndarray:
    """Draw ``count`` i.i.d. symbols.

    BPSK/QPSK symbols are uniform over the constellation.  AWGN-noise draws a
    circular complex Gaussian with unit variance per real dimension, i.e. the
    same normalization as the thermal noise.
    """
    scheme = Scheme.parse(scheme)
    if count < 1:
        raise ValueError("count must be at least 1")
    if scheme is Scheme.AWGN:
        if victim:
            raise ValueError("AWGN noise is a jammer-only waveform")
        return rng.standard_normal(count) + 1j * rng.standard_normal(count)
    points = _CONSTELLATIONS[scheme]
    return points[rng.integers(0, len(points), size=count)]


def ml_detect(received, scheme: Scheme):
    """Minimum-distance decision assuming signal plus Gaussian noise only.

    Boundary samples go to the first-listed constellation point, so a BPSK
    sample at exactly 0 decides +1 and QPSK ties fall toward (1+1j)/sqrt(2).
    """
    scheme = Scheme.parse(scheme)
    y = np.asarray(received)
    if scheme is Scheme.BPSK:
        out = np.where(y.real >= 0, 1.0 + 0j, -1.0 + 0j)
    elif scheme is Scheme.QPSK:
        re = np.where(y.real >= 0, 1.0, -1.0)
        im = np.where(y.imag >= 0, 1.0, -1.0)
        out = SQRT_HALF * (re + 1j * im)
    else:
        raise ValueError("victim detection needs BPSK or QPSK")
    return out if out.ndim else complex(out)


def jam_waveform(action: JammerAction, n_symbols: int, rng: RngLike, phase: float = 0.0) -> np.ndarray:
    """Sampled pulsed jamming: on with probability rho at peak power jnr/rho."""
    on = _stream(rng, "pulse").random(n_symbols) < action.rho
    j = modulate(action.scheme, n_symbols, _stream(rng, "jammer"))
    amp = math.sqrt(action.peak_jnr)
    if phase:
        j = j * np.exp(1j * phase)
    return np.where(on, amp * j, 0.0)


def simulate_packet(
    victim_scheme: Scheme,
    channel: ChannelParams,
    action: JammerAction,
    n_symbols: int,
    error_rule: ErrorRule,
    rng: RngLike,
) -> PacketOutcome:
    """Send one packet through the jammed link and count symbol errors."""
    if n_symbols < 1:
        raise ValueError("n_symbols must be at least 1")
    error_rule = ErrorRule.parse(error_rule)
    x = modulate(victim_scheme, n_symbols, _stream(rng, "victim"), victim=True)
    phase = 0.0 if channel.coherent else _stream(rng, "phase").uniform(0.0, 2 * math.pi)
    jam = jam_waveform(action, n_symbols, rng, phase)
    noise_rng = _stream(rng, "noise")
    noise = noise_rng.standard_normal(n_symbols) + 1j * noise_rng.standard_normal(n_symbols)
    y = math.sqrt(channel.snr) * x + jam + noise
    errors = int(np.count_nonzero(ml_detect(y, victim_scheme) != x))
    return PacketOutcome(n_symbols, errors, errors >= error_rule.min_errors(n_symbols))
