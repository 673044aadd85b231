import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, signal

from conftest import C, FS, T0, gaussian_pulse, rel_l2
from wavechannel.channel import (
    Channel,
    NoiseSpec,
    Ray,
    channel_apply,
    delay_of_reception,
    doppler_monotonicity_check,
    ray_to_timescale,
)

subluminal = st.floats(-0.9 * C, 0.9 * C)


def _emission_time(r, t, c):
    # solve the propagation equations numerically: t = t_r + R2(t_r)/c, t_r = t_e + R1(t_e)/c
    tr = optimize.brentq(lambda tr: tr + (r.r20 + r.v2 * tr) / c - t, -1e3, 1e3, xtol=1e-300, rtol=1e-15)
    return optimize.brentq(lambda te: te + (r.r10 + r.v1 * te) / c - tr, -1e3, 1e3, xtol=1e-300, rtol=1e-15)


def test_static_ray():
    p = ray_to_timescale(Ray(4.5, 1.5), C)
    assert p.s0 == 1.0 and p.amp == 1.0
    assert p.tau0 == pytest.approx(2e-8, rel=1e-15)


def test_moving_transmitter_leg():
    p = ray_to_timescale(Ray(3, 3, v1=3e6), C)
    assert p.s0 == pytest.approx(1.01, rel=1e-15)
    assert p.tau0 == pytest.approx(2e-8, rel=1e-15)


def test_moving_receiver_leg():
    p = ray_to_timescale(Ray(3, 3, v2=3e6, pr=0.5), C)
    assert p.s0 == pytest.approx(1.01, rel=1e-15)
    assert p.tau0 == pytest.approx(2.01e-8, rel=1e-14)
    assert p.amp == pytest.approx(0.5 / math.sqrt(1.01), rel=1e-15)


def test_path_loss_flag():
    p = ray_to_timescale(Ray(4.5, 1.5, pr=0.5), C, path_loss=True)
    assert p.amp == pytest.approx(0.5 / (4 * math.pi * 6.0), rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(r10=st.floats(0, 100), r20=st.floats(0, 100), v1=subluminal, v2=subluminal)
def test_params_match_propagation_equations(r10, r20, v1, v2):
    r = Ray(r10, r20, v1, v2)
    p = ray_to_timescale(r, C)
    for t in (1e-7, 1e-6):
        te = _emission_time(r, t, C)
        assert (t - p.tau0) / p.s0 == pytest.approx(te, rel=1e-9, abs=1e-20)
        # the long closed-form delay expression agrees as well
        assert delay_of_reception(r, t, C) == pytest.approx(t - te, rel=1e-9, abs=1e-20)


@pytest.mark.parametrize("v1,v2", [(-C, 0.0), (0.0, -C), (-2 * C, 0.0)])
def test_rejects_non_physical_speeds(v1, v2):
    with pytest.raises(ValueError):
        ray_to_timescale(Ray(1, 1, v1, v2), C)
    with pytest.raises(ValueError):
        Channel((Ray(1, 1, v1, v2),), C)


def test_ray_validation():
    with pytest.raises(ValueError):
        Ray(-1, 1)
    with pytest.raises(ValueError):
        Ray(1, 1, pr=1.5)
    with pytest.raises(ValueError):
        Ray(1, float("nan"))


def test_s0_unity_for_static_rays_only():
    rng = np.random.default_rng(0)
    for _ in range(200):
        r10, r20 = rng.uniform(0, 50, 2)
        assert ray_to_timescale(Ray(r10, r20), C).s0 == 1.0
        v = rng.uniform(-0.9, 0.9) * C
        assert ray_to_timescale(Ray(r10, r20, v1=v), C).s0 != 1.0
        assert ray_to_timescale(Ray(r10, r20, v2=v), C).s0 != 1.0


def test_identity_channel_exact():
    x = gaussian_pulse()
    y = channel_apply(Channel((Ray(0, 0),), C), x)
    np.testing.assert_array_equal(y.samples, x.samples)


def test_static_delay():
    x = gaussian_pulse(t_center=0.0)
    y = channel_apply(Channel((Ray(3, 3, pr=0.7),), C), x)
    lag = int(round(2e-8 * FS))
    xc = signal.correlate(y.samples, x.samples, mode="full")
    assert np.argmax(xc) - (x.size - 1) == lag
    expected = np.zeros_like(x.samples)
    expected[lag:] = 0.7 * x.samples[:-lag]
    assert np.abs(y.samples - expected).max() <= 1e-6 * np.abs(expected).max()


def test_two_rays_additive():
    x = gaussian_pulse(t_center=0.0)
    r1, r2 = Ray(3, 3, pr=0.7), Ray(4.5, 1.5, v1=2e6, pr=0.4)
    both = channel_apply(Channel((r1, r2), C), x).samples
    parts = channel_apply(Channel((r1,), C), x).samples + channel_apply(Channel((r2,), C), x).samples
    assert np.abs(both - parts).max() <= 1e-10 * np.abs(parts).max()


def test_linear_in_input():
    a, b = gaussian_pulse(t_center=0.0), gaussian_pulse(center=2e9, t_center=5e-9)
    ch = Channel((Ray(3, 3, v2=1e6, pr=0.9),), C)
    lhs = channel_apply(ch, a.with_samples(2 * a.samples - 3 * b.samples)).samples
    rhs = 2 * channel_apply(ch, a).samples - 3 * channel_apply(ch, b).samples
    assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()


@pytest.mark.parametrize("v", [3e6, -3e6, 1.5e7])
def test_energy_preserved_under_dilation(v):
    x = gaussian_pulse(t_center=0.0)
    y = channel_apply(Channel((Ray(3, 3, v1=v),), C), x)
    assert y.energy == pytest.approx(x.energy, rel=1e-4)


def test_dilation_matches_closed_form():
    x = gaussian_pulse(t_center=0.0)
    ray = Ray(3, 3, v1=3e6, v2=-1e6, pr=0.8)
    p = ray_to_timescale(ray, C)
    y = channel_apply(Channel((ray,), C), x)
    u = (y.times - p.tau0) / p.s0
    expected = p.amp * np.exp(-0.5 * (u * 6e8) ** 2) * np.cos(3e9 * u)
    assert rel_l2(y.samples, expected) < 1e-4


def test_seeded_noise_reproducible():
    x = gaussian_pulse(t_center=0.0)
    ch = Channel((Ray(3, 3),), C, NoiseSpec(10.0, seed=42))
    a = channel_apply(ch, x).samples
    b = channel_apply(ch, x).samples
    np.testing.assert_array_equal(a, b)
    c = channel_apply(ch, x, seed=43).samples
    assert not np.array_equal(a, c)


def test_noise_level():
    x = gaussian_pulse(t_center=0.0)
    ch = Channel((Ray(3, 3),), C, NoiseSpec(10.0, seed=1))
    clean = channel_apply(ch.noiseless(), x).samples
    noise = channel_apply(ch, x).samples - clean
    assert np.mean(noise**2) == pytest.approx(np.mean(clean**2) / 10.0, rel=0.05)


def test_window_overflow_reports_required_window():
    x = gaussian_pulse(t_center=0.0)
    ch = Channel((Ray(30, 30),), C)
    with pytest.raises(ValueError, match="required window"):
        channel_apply(ch, x)


def test_empty_channel_gives_zero():
    x = gaussian_pulse()
    assert not np.any(channel_apply(Channel((), C), x).samples)


def test_monotonicity_static():
    rep = doppler_monotonicity_check(Ray(3, 3), C)
    assert rep.ds0_dv1 == pytest.approx(1 / C, rel=1e-15)
    assert rep.ds0_dv2 == pytest.approx(1 / C, rel=1e-15)
    assert rep.ok and rep.max_rel_error < 1e-6


def test_monotonicity_moving_receiver():
    rep = doppler_monotonicity_check(Ray(3, 3, v2=C / 100), C)
    assert rep.ds0_dv1 == pytest.approx(1.01 / C, rel=1e-14)
    assert abs(rep.fd_dv1 - 1.01 / C) <= 1e-6 * 1.01 / C


def test_monotonicity_random_rays():
    rng = np.random.default_rng(7)
    for _ in range(100):
        v1, v2 = rng.uniform(-0.99, 0.99, 2) * C
        rep = doppler_monotonicity_check(Ray(1, 2, v1, v2), C)
        assert rep.ok
        assert rep.max_rel_error < 1e-6
