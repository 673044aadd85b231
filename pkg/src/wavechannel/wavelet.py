"""Analytic Cauchy-class mother wavelet, its atoms and admissibility constant.

Fourier convention throughout the package: ``F(w) = int f(t) exp(-i w t) dt``.
The mother wavelet has spectrum ``w**n * exp(-w)`` for ``w > 0`` and zero
otherwise, so its time-domain form is

    psi(t) = Gamma(n + 1) / (2 pi) * (1 - i t) ** -(n + 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

FOURIER_CONVENTION = "F(w) = int f(t) exp(-i w t) dt"


@dataclass(frozen=True)
class MotherWavelet:
    """Progressive wavelet of order ``n`` (default 3)."""

    order: int = 3
    fourier_convention: str = FOURIER_CONVENTION

    def __post_init__(self):
        if isinstance(self.order, bool) or not isinstance(self.order, (int, np.integer)):
            raise TypeError(f"wavelet order must be an integer, got {self.order!r}")
        if self.order < 1:
            raise ValueError(f"wavelet order must be >= 1, got {self.order}")
        if self.fourier_convention != FOURIER_CONVENTION:
            raise ValueError("only the exp(-i w t) forward convention is supported")

    def __call__(self, t):
        return mother_eval(self, t)

    def spectrum(self, omega):
        """Fourier transform of the mother wavelet, zero for ``omega <= 0``."""
        omega = np.asarray(omega, dtype=float)
        out = np.zeros_like(omega)
        pos = omega > 0
        w = omega[pos]
        out[pos] = np.exp(self.order * np.log(w) - w)
        return out

    @property
    def norm_sq(self) -> float:
        """Squared L2 norm, ``Gamma(2n + 1) / (2 pi 2**(2n + 1))``."""
        n = self.order
        return math.exp(math.lgamma(2 * n + 1) - (2 * n + 1) * math.log(2.0)) / (2 * math.pi)

    @property
    def rms_width(self) -> float:
        """RMS duration of ``|psi|**2`` in units of the mother's time axis."""
        return 1.0 / math.sqrt(2 * self.order - 1)

    @property
    def effective_width(self) -> float:
        """Twice the RMS duration; used for sampling and guard-band checks."""
        return 2.0 * self.rms_width

    @property
    def admissibility(self) -> float:
        return admissibility(self)


@dataclass(frozen=True)
class WaveletAtom:
    """Scaled and translated copy ``s**-0.5 * psi((t - tau) / s)``."""

    scale: float
    translation: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"atom scale must be positive and finite, got {self.scale}")
        if not np.isfinite(self.translation):
            raise ValueError(f"atom translation must be finite, got {self.translation}")

    def spectrum(self, w: MotherWavelet, omega):
        """``s**0.5 * Psi(s omega) * exp(-i omega tau)``."""
        omega = np.asarray(omega, dtype=float)
        return (
            math.sqrt(self.scale)
            * w.spectrum(self.scale * omega)
            * np.exp(-1j * omega * self.translation)
        )


def mother_eval(w: MotherWavelet, t):
    """Closed-form value of the mother wavelet at ``t`` (scalar or array)."""
    n = w.order
    t = np.asarray(t, dtype=float)
    val = (math.gamma(n + 1) / (2 * math.pi)) * np.power(1.0 - 1j * t, -(n + 1))
    return val[()] if val.ndim == 0 else val


def atom_eval(a: WaveletAtom, w: MotherWavelet, t):
    return mother_eval(w, (np.asarray(t, dtype=float) - a.translation) / a.scale) / math.sqrt(a.scale)


def sample_atoms(w: MotherWavelet, scales, t):
    """Atoms at ``tau = 0`` for every scale, sampled at ``t``; shape ``(len(scales), len(t))``."""
    scales = np.asarray(scales, dtype=float)[:, None]
    return mother_eval(w, np.asarray(t, dtype=float)[None, :] / scales) / np.sqrt(scales)


def admissibility(w: MotherWavelet) -> float:
    """Closed-form admissibility constant ``Gamma(2n) / 2**(2n)``."""
    n = w.order
    return math.exp(math.lgamma(2 * n) - 2 * n * math.log(2.0))


def admissibility_quadrature(w: MotherWavelet) -> float:
    """Numerical value of ``int |Psi(w)|**2 / |w| dw`` (the integrand vanishes for ``w <= 0``)."""
    val, _ = integrate.quad(
        lambda om: w.spectrum(om) ** 2 / om, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200
    )
    return val
