import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jamming_bandits.analytic import (
    HolderParams, QuadratureError, SaturatedFeedbackWarning, SerQuery, _phase_average, holder_constants,
    per_from_ser, ser_awgn_jam, ser_bpsk_on_bpsk, ser_from_per, ser_given_phase, ser_numeric, ser_pulsed,
)

SQ2 = math.sqrt(2.0)


def bpsk_on_bpsk_ref(snr, jnr):
    """Stdlib erfc, independent of the scipy path."""
    a, b = math.sqrt(snr), math.sqrt(jnr)
    return 0.25 * (math.erfc((a + b) / SQ2) + math.erfc((a - b) / SQ2))


def binom_tail_ref(k, n, p):
    """P(X >= k) for X ~ Binomial(n, p), exact rational arithmetic."""
    p = Fraction(p)
    return float(sum(math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(k, n + 1)))


# frozen from the references above
PE_100_10 = 2.0115538117738845e-12
PER_0075 = 0.2167313165450183
PER_0065 = 0.11534530186104452


def test_frozen_values_match_references():
    assert bpsk_on_bpsk_ref(100, 10) == pytest.approx(PE_100_10, rel=1e-12)
    assert binom_tail_ref(10, 100, 0.075) == pytest.approx(PER_0075, rel=1e-12)
    assert binom_tail_ref(10, 100, 0.065) == pytest.approx(PER_0065, rel=1e-12)


def test_bpsk_on_bpsk_examples():
    assert ser_bpsk_on_bpsk(0.0, 7.0) == pytest.approx(0.5)
    s = 3.0
    assert ser_bpsk_on_bpsk(s, s) == pytest.approx(0.25 * (math.erfc(math.sqrt(2 * s)) + 1))
    assert ser_bpsk_on_bpsk(100.0, 10.0) == pytest.approx(PE_100_10, rel=1e-9)


def test_pulsed_examples():
    assert ser_pulsed(ser_bpsk_on_bpsk, 100.0, 10.0, 1.0) == pytest.approx(PE_100_10, rel=1e-9)
    assert ser_pulsed(ser_bpsk_on_bpsk, 100.0, 10.0, 0.078) == pytest.approx(0.0354, abs=1e-4)
    assert ser_pulsed(ser_bpsk_on_bpsk, 4.0, 0.0, 0.3) == pytest.approx(ser_bpsk_on_bpsk(4.0, 0.0))
    with pytest.raises(ValueError):
        ser_pulsed(ser_bpsk_on_bpsk, 4.0, 1.0, 0.0)


def test_awgn_jam_examples():
    assert ser_awgn_jam("BPSK", 9.0, 0.0) == pytest.approx(0.5 * math.erfc(math.sqrt(4.5)))
    assert ser_awgn_jam("BPSK", 100.0, 10.0) == pytest.approx(0.5 * math.erfc(math.sqrt(100 / 22)))
    assert ser_awgn_jam("QPSK", 0.0, 5.0) == pytest.approx(0.75)


def test_ser_numeric_matches_closed_forms_on_grid():
    vals = [0.0, 1.0, 10.0, 100.0]
    rhos = [0.05, 0.3, 0.7, 1.0]
    for snr in vals:
        for jnr in vals:
            for rho in rhos:
                got = ser_numeric(SerQuery("BPSK", "BPSK", snr, jnr, rho))
                assert got == pytest.approx(ser_pulsed(bpsk_on_bpsk_ref, snr, jnr, rho), abs=1e-6)
                got = ser_numeric(SerQuery("BPSK", "AWGN", snr, jnr, rho))
                want = rho * ser_awgn_jam("BPSK", snr, jnr / rho) + (1 - rho) * ser_awgn_jam("BPSK", snr, 0.0)
                assert got == pytest.approx(want, abs=1e-6)


def test_ser_numeric_zero_snr_is_half():
    for jam in ("AWGN", "BPSK", "QPSK"):
        for coherent in (True, False):
            assert ser_numeric(SerQuery("BPSK", jam, 0.0, 8.0, 0.4, coherent)) == pytest.approx(0.5)


def test_noncoherent_bpsk_value_is_interior():
    p = ser_numeric(SerQuery("BPSK", "BPSK", 100.0, 10.0, 0.06, coherent=False))
    assert 0.0 < p < 0.5
    # the phase-averaged pulse is weaker than the perfectly aligned one
    assert p < ser_numeric(SerQuery("BPSK", "BPSK", 100.0, 10.0, 0.06, coherent=True))


def test_phase_average_of_cos_squared():
    # a smooth periodic integrand whose mean is known exactly
    assert _phase_average(lambda ph: np.cos(ph) ** 2) == pytest.approx(0.5, abs=1e-12)


def test_phase_average_gives_up():
    rng = np.random.default_rng(0)
    with pytest.raises(QuadratureError):
        _phase_average(lambda ph: rng.random(ph.shape))


def test_given_phase_broadcasts():
    out = ser_given_phase("QPSK", "BPSK", 10.0, np.array([1.0, 5.0])[:, None], np.linspace(0, 1, 3)[None, :])
    assert out.shape == (2, 3)


@given(st.sampled_from(["BPSK", "QPSK"]), st.sampled_from(["AWGN", "BPSK", "QPSK"]),
       st.floats(0, 200), st.floats(0, 200), st.floats(0.001, 1.0), st.booleans())
def test_error_rates_are_probabilities(victim, jam, snr, jnr, rho, coherent):
    p = ser_numeric(SerQuery(victim, jam, snr, jnr, rho, coherent))
    cap = 0.5 if victim == "BPSK" else 0.75
    assert -1e-12 <= p <= cap + 1e-9


def test_per_from_ser_examples():
    assert per_from_ser(0.0, 1234, "any") == 0.0
    assert per_from_ser(0.0, 1234, "threshold:0.1") == 0.0
    assert per_from_ser(0.075, 100, "threshold:0.1") == pytest.approx(PER_0075, rel=1e-9)
    assert per_from_ser(0.065, 100, "threshold:0.1") == pytest.approx(PER_0065, rel=1e-9)
    assert per_from_ser(0.01, 100, "any") == pytest.approx(1 - 0.99**100)


@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999), st.integers(1, 2000))
def test_any_error_per_is_increasing(a, b, n):
    lo, hi = sorted((a, b))
    assert per_from_ser(lo, n, "any") <= per_from_ser(hi, n, "any")


@given(st.floats(0.0, 1.0), st.integers(10, 5000))
def test_any_error_rule_is_the_harsher_rule(s, n):
    assert per_from_ser(s, n, "any") >= per_from_ser(s, n, "threshold:0.1") - 1e-12


def test_ser_from_per_examples():
    assert ser_from_per(0.0, 50) == 0.0
    assert ser_from_per(1 - 0.99**100, 100) == pytest.approx(0.01)
    assert ser_from_per(0.5, 10_000) == pytest.approx(1 - 0.5 ** 1e-4)
    assert ser_from_per(0.5, 10_000) == pytest.approx(6.93e-5, rel=1e-3)
    with pytest.warns(SaturatedFeedbackWarning):
        assert ser_from_per(1.0, 100) == 1.0
    with pytest.raises(ValueError):
        ser_from_per(1.2, 10)


@given(st.floats(0.0, 0.99), st.integers(1, 10_000))
def test_ser_per_round_trip(s, n):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        per = per_from_ser(s, n, "any")
        if per < 0.999:  # beyond this the inversion is ill-conditioned
            assert ser_from_per(per, n) == pytest.approx(s, rel=1e-6, abs=1e-9)


def test_holder_constants():
    h = holder_constants(100.0, 10.0)
    assert h.constant_L == pytest.approx(math.sqrt(100 / (8 * math.pi)))
    assert h.constant_L == pytest.approx(1.9947, abs=1e-4)
    assert holder_constants(1.0, 1.0).constant_L == pytest.approx(1.0)  # floor at 1
    assert math.sqrt(1 / (2 * math.pi)) == pytest.approx(0.3989, abs=1e-4)
    for snr, jnr in [(1, 1), (100, 1), (3, 50)]:
        assert holder_constants(snr, jnr).exponent_alpha == 1.0
    with pytest.raises(ValueError):
        holder_constants(100.0, 0.5)
    with pytest.raises(ValueError):
        HolderParams(1.0, exponent_alpha=1.5)


def test_ser_query_validation():
    with pytest.raises(ValueError):
        SerQuery("AWGN", "BPSK", 1.0, 1.0)
    with pytest.raises(ValueError):
        SerQuery("BPSK", "BPSK", 1.0, 1.0, rho=0.0)


def _argmax_rho(coherent, m=1000):
    rho = np.arange(1, m + 1) / m
    if coherent:
        vals = ser_pulsed(ser_bpsk_on_bpsk, 100.0, 10.0, rho)
    else:
        vals = np.array([ser_numeric(SerQuery("BPSK", "BPSK", 100.0, 10.0, r, False)) for r in rho])
    i = int(np.argmax(vals))
    return rho[i], vals[i]


def test_best_pulse_ratio_coherent():
    r, v = _argmax_rho(True)
    assert abs(r - 0.078) <= 1e-3
    assert v == pytest.approx(0.035375, abs=1e-5)


def test_best_pulse_ratio_noncoherent():
    r, v = _argmax_rho(False, m=200)
    assert abs(r - 0.06) <= 5e-3
    assert v == pytest.approx(0.01287, abs=2e-4)
