import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from wavechannel.wavelet import (
    MotherWavelet,
    WaveletAtom,
    admissibility,
    admissibility_quadrature,
    atom_eval,
    mother_eval,
    sample_atoms,
)


def _inverse_fourier(n, t):
    # psi(t) = (1/2pi) int_0^inf w^n e^{-w} e^{i w t} dw, evaluated independently
    f = lambda w, part: w**n * math.exp(-w) * (math.cos(w * t) if part == 0 else math.sin(w * t))
    re = integrate.quad(f, 0, np.inf, args=(0,), limit=400)[0]
    im = integrate.quad(f, 0, np.inf, args=(1,), limit=400)[0]
    return complex(re, im) / (2 * math.pi)


def _atom_norm_sq(w, a):
    # closed-form integrand is smooth; integrate on a range wide enough for |t|^-(2n+2) decay
    f = lambda t: abs(atom_eval(a, w, t)) ** 2
    lo, hi = a.translation - 2e3 * a.scale, a.translation + 2e3 * a.scale
    pts = [a.translation + k * a.scale for k in (-5, -1, 0, 1, 5)]
    return integrate.quad(f, lo, hi, points=pts, limit=2000, epsrel=1e-12)[0]


def test_order_one_at_origin():
    w = MotherWavelet(1)
    assert mother_eval(w, 0.0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert mother_eval(w, 0.0) == pytest.approx(_inverse_fourier(1, 0.0), rel=1e-9)


def test_order_three_at_one():
    w = MotherWavelet(3)
    val = mother_eval(w, 1.0)
    assert val == pytest.approx(-6 / (8 * math.pi), rel=1e-13)
    assert abs(val.imag) < 1e-15
    assert val == pytest.approx(_inverse_fourier(3, 1.0), rel=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("t", [-3.7, -0.4, 0.9, 6.0])
def test_closed_form_matches_inverse_fourier(n, t):
    assert abs(mother_eval(MotherWavelet(n), t) - _inverse_fourier(n, t)) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 4])
def test_decay_rate(n):
    w = MotherWavelet(n)
    for t in (1e3, -1e4):
        ratio = abs(mother_eval(w, 10 * t)) / abs(mother_eval(w, t))
        assert ratio == pytest.approx(10.0 ** -(n + 1), rel=1e-4)


def test_order_validation():
    with pytest.raises(ValueError):
        MotherWavelet(0)
    with pytest.raises(TypeError):
        MotherWavelet(2.5)
    with pytest.raises(ValueError):
        WaveletAtom(0.0)
    with pytest.raises(ValueError):
        WaveletAtom(-1.0, 0.0)


def test_identity_and_scaled_atoms():
    w = MotherWavelet(3)
    t = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(atom_eval(WaveletAtom(1.0), w, t), mother_eval(w, t), rtol=0, atol=0)
    assert atom_eval(WaveletAtom(2.0), w, 0.0) == pytest.approx(mother_eval(w, 0.0) / math.sqrt(2))
    rows = sample_atoms(w, [1.0, 2.0], t)
    np.testing.assert_allclose(rows[1], atom_eval(WaveletAtom(2.0), w, t), rtol=1e-15)


@pytest.mark.parametrize("n,expected", [(1, 0.25), (2, 0.375), (3, 1.875)])
def test_admissibility_examples(n, expected):
    w = MotherWavelet(n)
    assert admissibility(w) == pytest.approx(expected, rel=1e-14)
    # independent oracle: int_0^inf w^(2n-1) e^{-2w} dw
    oracle = integrate.quad(lambda x: x ** (2 * n - 1) * math.exp(-2 * x), 0, np.inf)[0]
    assert admissibility(w) == pytest.approx(oracle, rel=1e-10)


@pytest.mark.parametrize("n", range(1, 7))
def test_admissibility_quadrature_agrees(n):
    w = MotherWavelet(n)
    assert abs(admissibility_quadrature(w) - admissibility(w)) <= 1e-6 * admissibility(w)


@pytest.mark.parametrize("n", [1, 3, 4])
def test_norm_closed_form(n):
    w = MotherWavelet(n)
    assert _atom_norm_sq(w, WaveletAtom(1.0)) == pytest.approx(w.norm_sq, rel=1e-6)


def test_norm_invariance_example():
    w = MotherWavelet(3)
    assert abs(_atom_norm_sq(w, WaveletAtom(3.0, 5e-8)) - w.norm_sq) <= 1e-6 * w.norm_sq
    assert w.norm_sq == pytest.approx(0.8952465548919, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(log_s=st.floats(-3, 3), tau=st.floats(-50, 50))
def test_norm_invariance_random(log_s, tau):
    w = MotherWavelet(3)
    a = WaveletAtom(10.0**log_s, tau)
    assert abs(_atom_norm_sq(w, a) - w.norm_sq) <= 1e-4 * w.norm_sq


@pytest.mark.parametrize("n", [1, 3])
def test_progressive(n):
    w = MotherWavelet(n)
    assert np.all(w.spectrum(np.linspace(-50, 0, 101)) == 0)
    # negative-frequency content of the sampled atom
    dt = 0.02
    t = np.arange(-2**15, 2**15) * dt
    spec = np.fft.fft(mother_eval(w, t))
    freqs = np.fft.fftfreq(t.size, dt)
    # numpy uses exp(-i w t); psi's spectrum lives on positive w
    neg = np.sum(np.abs(spec[freqs < 0]) ** 2) / np.sum(np.abs(spec) ** 2)
    assert neg < 1e-6


def test_atom_spectrum_matches_fft():
    w = MotherWavelet(3)
    a = WaveletAtom(2.0, 3.0)
    dt = 0.01
    t = np.arange(-2**16, 2**16) * dt
    x = atom_eval(a, w, t)
    omega = 2 * np.pi * np.fft.fftfreq(t.size, dt)
    # continuous FT approximated by a Riemann sum, forward kernel exp(-i w t)
    ft = dt * np.exp(-1j * omega * t[0]) * np.fft.fft(x)
    sel = (omega > 0.2) & (omega < 6)
    np.testing.assert_allclose(ft[sel], a.spectrum(w, omega[sel]), atol=2e-3)
