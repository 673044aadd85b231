import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import C
from wavechannel.channel import Channel, Ray
from wavechannel.modem import (
    MAX_RATIO,
    BitStream,
    ModemConfig,
    antipodal_ber,
    ber_run,
    combine,
    correlate,
    demodulate,
    modulate,
    q_function,
)
from wavechannel.transform import TimeSeries


def _within_binomial(report, p, k=4.0):
    sd = math.sqrt(p * (1 - p) / report.n_bits)
    return abs(report.ber - p) <= k * sd


def test_single_bit_single_scale():
    cfg = ModemConfig(scales_used=1)
    x = modulate(cfg, BitStream(np.array([1])))
    assert x.size == cfg.frame_len == 2
    np.testing.assert_allclose(x.samples, math.sqrt(cfg.fs) * np.array([1.0, -1.0]) / math.sqrt(2))
    assert x.energy == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_unit_energy_per_bit(m):
    cfg = ModemConfig(scales_used=m)
    bits = BitStream.random(64, seed=m)
    x = modulate(cfg, bits)
    per_bit = (x.samples.reshape(64, cfg.frame_len) ** 2).sum(axis=1) * x.dt
    assert np.abs(per_bit - 1.0).max() <= 1e-8


@settings(max_examples=30, deadline=None)
@given(bits=st.lists(st.integers(0, 1), min_size=1, max_size=40), m=st.integers(1, 5), m0=st.integers(1, 3))
def test_antipodal_and_perfect_reconstruction(bits, m, m0):
    cfg = ModemConfig(scales_used=m, base_scale=m0)
    b = BitStream(np.array(bits))
    x, xc = modulate(cfg, b), modulate(cfg, b.complement())
    assert not np.any(x.samples + xc.samples)
    np.testing.assert_array_equal(demodulate(cfg, x).bits, b.bits)


def test_gram_is_identity():
    for m in range(1, 6):
        G = ModemConfig(scales_used=m, base_scale=2).gram()
        assert np.abs(G - np.eye(G.shape[0])).max() <= 1e-8


def test_config_validation():
    with pytest.raises(ValueError):
        ModemConfig(scales_used=0)
    with pytest.raises(ValueError):
        ModemConfig(base_scale=0)
    with pytest.raises(ValueError):
        ModemConfig(basis="db4")
    with pytest.raises(ValueError):
        ModemConfig(combiner="selection")
    with pytest.raises(ValueError):
        BitStream(np.array([0, 2]))
    with pytest.raises(ValueError):
        modulate(ModemConfig(), BitStream(np.array([], dtype=int)))


def test_frame_length_mismatch():
    cfg = ModemConfig(scales_used=2)
    x = modulate(cfg, BitStream(np.array([1, 0, 1])))
    with pytest.raises(ValueError):
        demodulate(cfg, TimeSeries(x.samples[:-1], x.fs))


def test_zero_statistic_decodes_as_zero():
    cfg = ModemConfig(scales_used=2)
    y = TimeSeries(np.zeros(3 * cfg.frame_len), cfg.fs)
    np.testing.assert_array_equal(demodulate(cfg, y).bits, [0, 0, 0])


def test_scale_erasure_keeps_zero_ber():
    cfg = ModemConfig(scales_used=4)
    bits = BitStream.random(500, seed=3)
    z = correlate(cfg, modulate(cfg, bits))
    for m in range(4):
        erased = z.copy()
        erased[:, m] = 0.0
        np.testing.assert_array_equal((combine(cfg, erased) > 0).astype(int), bits.bits)


def test_q_function_values():
    assert q_function(0.0) == pytest.approx(0.5)
    assert q_function(1.0) == pytest.approx(0.15865525393145707, rel=1e-12)
    assert antipodal_ber(10.0) == pytest.approx(3.872108215522035e-06, rel=1e-9)


@pytest.mark.parametrize("combiner", ["equal-gain", MAX_RATIO])
def test_identity_noiseless_zero_ber(combiner):
    cfg = ModemConfig(combiner=combiner)
    rep = ber_run(cfg, None, 2000, None, seed=1)
    assert rep.n_errors == 0
    rep = ber_run(cfg, Channel((Ray(0, 0),), C), 2000, None, seed=1)
    assert rep.n_errors == 0


@pytest.mark.parametrize("snr_db", [0.0, 4.0, 5.5])
def test_single_scale_matches_antipodal_theory(snr_db):
    rep = ber_run(ModemConfig(scales_used=1), None, 200_000, snr_db, seed=5)
    assert _within_binomial(rep, antipodal_ber(snr_db))


def test_repetition_over_scales_keeps_bit_energy():
    # unit energy split evenly over M orthogonal atoms: equal-gain combining is coherent
    rep = ber_run(ModemConfig(scales_used=4), None, 100_000, 4.0, seed=6)
    assert _within_binomial(rep, antipodal_ber(4.0))


def test_max_ratio_close_to_equal_gain_on_awgn():
    eg = ber_run(ModemConfig(scales_used=3), None, 50_000, 3.0, seed=2)
    mr = ber_run(ModemConfig(scales_used=3, combiner=MAX_RATIO), None, 50_000, 3.0, seed=2)
    assert mr.ber <= 1.2 * eg.ber


def test_ber_deterministic():
    cfg = ModemConfig()
    ch = Channel((Ray(4.5, 1.5),), C)
    a = ber_run(cfg, ch, 3000, 3.0, seed=9)
    b = ber_run(cfg, ch, 3000, 3.0, seed=9)
    assert a == b
    assert ber_run(cfg, ch, 3000, 3.0, seed=10) != a


def test_ber_monotone_static_ray():
    cfg = ModemConfig()
    ch = Channel((Ray(4.5, 1.5),), C)
    bers = [ber_run(cfg, ch, 10_000, snr, seed=0).ber for snr in (0, 5, 10, 15, 20)]
    assert all(b1 >= b2 for b1, b2 in zip(bers, bers[1:]))
    assert bers[0] > 0


def test_per_scale_snr_reported():
    rep = ber_run(ModemConfig(scales_used=3), None, 5000, 10.0, seed=4)
    assert len(rep.scale_snr_db) == 3
    # each level carries 1/3 of the bit energy
    expected = 10 * math.log10(2 * 10.0 / 3)
    for v in rep.scale_snr_db:
        assert v == pytest.approx(expected, abs=0.3)
    with pytest.raises(ValueError):
        ber_run(ModemConfig(), None, 0, 10.0, seed=0)
