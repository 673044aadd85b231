"""Forward/inverse CWT on a log-scale grid, reproducing kernel and projection.

All integrals over the time-scale plane use the measure ``ds dtau / s**2``,
discretized as trapezoid in ``tau`` and as ``(ln 2 / Q) / s_j`` per voice in
scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal

from .wavelet import MotherWavelet, WaveletAtom, mother_eval, sample_atoms

_ALIGN_TOL = 1e-6
# The direct-quadrature path builds an (n_translations, n_samples) block per scale.
_DIRECT_BLOCK = 2**22


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled waveform; sample ``i`` sits at ``t0 + i / fs``."""

    samples: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.size < 2:
            raise ValueError("a time series needs at least 2 samples")
        if not (np.isfinite(self.fs) and self.fs > 0):
            raise ValueError(f"sample rate must be positive, got {self.fs}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    @property
    def size(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.size / self.fs

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.size) / self.fs

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) / self.fs)

    def with_samples(self, samples) -> "TimeSeries":
        return TimeSeries(samples, self.fs, self.t0)

    def energetic_support(self, fraction: float = 1.0 - 1e-6) -> tuple[float, float]:
        """Smallest ``[t_lo, t_hi]`` holding ``fraction`` of the energy, tails split evenly."""
        p = np.abs(self.samples) ** 2
        total = p.sum()
        if total == 0:
            return (self.t0, self.t0)
        c = np.cumsum(p) / total
        tail = (1.0 - fraction) / 2
        lo = int(np.searchsorted(c, tail))
        hi = int(np.searchsorted(c, 1.0 - tail))
        t = self.times
        return (float(t[min(lo, self.size - 1)]), float(t[min(hi, self.size - 1)]))


@dataclass(frozen=True)
class TimeScaleGrid:
    """Scales ``s_min * 2**(j / Q)`` for ``j = 0 .. octaves * Q`` and a uniform translation axis."""

    s_min: float
    octaves: int
    voices: int
    n_translations: int
    dtau: float
    tau_start: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.s_min) and self.s_min > 0):
            raise ValueError(f"s_min must be positive, got {self.s_min}")
        if int(self.octaves) != self.octaves or self.octaves < 1:
            raise ValueError(f"octaves must be a positive integer, got {self.octaves}")
        if int(self.voices) != self.voices or self.voices < 1:
            raise ValueError(f"voices must be a positive integer, got {self.voices}")
        if int(self.n_translations) != self.n_translations or self.n_translations < 1:
            raise ValueError("need at least one translation")
        if not (np.isfinite(self.dtau) and self.dtau > 0):
            raise ValueError(f"translation spacing must be positive, got {self.dtau}")
        if not np.isfinite(self.tau_start):
            raise ValueError("translation start must be finite")

    @classmethod
    def for_series(
        cls, x: TimeSeries, s_min: float, octaves: int = 6, voices: int = 8
    ) -> "TimeScaleGrid":
        """Grid whose translation axis is the sampling axis of ``x``."""
        return cls(s_min, octaves, voices, x.size, x.dt, x.t0)

    @property
    def n_scales(self) -> int:
        return self.octaves * self.voices + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_scales, self.n_translations)

    @property
    def scales(self) -> np.ndarray:
        return self.s_min * 2.0 ** (np.arange(self.n_scales) / self.voices)

    @property
    def s_max(self) -> float:
        return self.s_min * 2.0**self.octaves

    @property
    def translations(self) -> np.ndarray:
        return self.tau_start + np.arange(self.n_translations) * self.dtau

    @property
    def scale_weights(self) -> np.ndarray:
        """Quadrature weights approximating ``ds / s**2`` on the log grid."""
        return (math.log(2.0) / self.voices) / self.scales

    def check_sampling(self, w: MotherWavelet, fs: float) -> None:
        """Reject grids whose smallest atom spans fewer than 4 samples."""
        span = self.s_min * w.effective_width * fs
        if span < 4:
            raise ValueError(
                f"smallest scale {self.s_min:.4g} s spans {span:.2f} samples at fs={fs:.4g} Hz; "
                f"need s_min >= {4 / (w.effective_width * fs):.4g} s"
            )


@dataclass(frozen=True)
class TimeScaleField:
    """Complex values on a grid, indexed ``[scale j, translation k]``."""

    grid: TimeScaleGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __add__(self, other: "TimeScaleField") -> "TimeScaleField":
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        return TimeScaleField(self.grid, self.values + other.values)

    def __sub__(self, other: "TimeScaleField") -> "TimeScaleField":
        return self + other.scaled(-1.0)

    def scaled(self, alpha: complex) -> "TimeScaleField":
        return TimeScaleField(self.grid, alpha * self.values)

    def norm(self) -> float:
        """Norm induced by the ``ds dtau / s**2`` measure."""
        return field_norm(self)


def field_norm(F: TimeScaleField) -> float:
    wts = F.grid.scale_weights[:, None] * F.grid.dtau
    return float(np.sqrt(np.sum(wts * np.abs(F.values) ** 2)))


def relative_deviation(a: TimeScaleField, b: TimeScaleField) -> float:
    """``||a - b|| / ||b||`` in the field norm; 0 when both vanish."""
    nb = field_norm(b)
    nd = field_norm(a - b)
    if nb == 0:
        return 0.0 if nd == 0 else math.inf
    return nd / nb


def cwt_rows(f: TimeSeries, w: MotherWavelet, g: TimeScaleGrid, scales) -> np.ndarray:
    """Transform rows of ``f`` at arbitrary ``scales`` on the translation axis of ``g``."""
    k0 = _aligned(g, f.t0, f.dt)
    if k0 is None:
        raise ValueError("translations must lie on the sampling grid of the series")
    return _cwt_fft(f, w, g, k0, scales)


@dataclass(frozen=True)
class TimeAxis:
    """Uniform sampling axis: ``n`` instants from ``t0`` at rate ``fs``."""

    t0: float
    fs: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.fs) and self.fs > 0):
            raise ValueError("axis sample rate must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("axis needs at least one sample")

    @classmethod
    def of(cls, x: TimeSeries) -> "TimeAxis":
        return cls(x.t0, x.fs, x.size)

    @classmethod
    def of_grid(cls, g: TimeScaleGrid) -> "TimeAxis":
        return cls(g.tau_start, 1.0 / g.dtau, g.n_translations)

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) / self.fs

    def matches(self, x: TimeSeries) -> bool:
        return (
            x.size == self.n
            and abs(x.fs - self.fs) <= _ALIGN_TOL * self.fs
            and abs(x.t0 - self.t0) <= _ALIGN_TOL * self.dt
        )


def _offset(x0: float, ref: float, step: float) -> int | None:
    """Integer ``m`` with ``x0 = ref + m * step``, or None if not aligned."""
    m = (x0 - ref) / step
    mi = round(m)
    return int(mi) if abs(m - mi) < _ALIGN_TOL else None


def _aligned(grid: TimeScaleGrid, t0: float, dt: float) -> int | None:
    if abs(grid.dtau - dt) > _ALIGN_TOL * dt:
        return None
    return _offset(grid.tau_start, t0, dt)


def cwt(
    f: TimeSeries,
    w: MotherWavelet,
    g: TimeScaleGrid,
    method: str = "auto",
    check: bool = True,
) -> TimeScaleField:
    """Continuous wavelet transform ``<psi_{s,tau}, f>`` sampled on ``g``.

    ``method="fft"`` correlates each scale with the sampled atom using FFT
    convolution and needs the translation axis to coincide with sample
    instants; ``"direct"`` evaluates the quadrature sum explicitly.  Both
    implement the same rectangle rule, ``dt * sum(conj(atom) * f)``.
    """
    if check:
        g.check_sampling(w, f.fs)
        _warn_guard(f, w, g)
    k0 = _aligned(g, f.t0, f.dt)
    if method == "auto":
        method = "fft" if k0 is not None else "direct"
    if method == "fft":
        if k0 is None:
            raise ValueError("fft path needs translations on the sampling grid")
        values = _cwt_fft(f, w, g, k0)
    elif method == "direct":
        values = _cwt_direct(f, w, g)
    else:
        raise ValueError(f"unknown cwt method {method!r}")
    return TimeScaleField(g, values)


def _cwt_fft(
    f: TimeSeries, w: MotherWavelet, g: TimeScaleGrid, k0: int, scales=None
) -> np.ndarray:
    scales = g.scales if scales is None else np.atleast_1d(np.asarray(scales, dtype=float))
    N, K = f.size, g.n_translations
    # values[k] = dt * sum_i f[i] * conj(a[i - k0 - k]),  a[m] = atom(m dt)
    # = dt * (f * h)[k0 + k - j_lo],  h[j - j_lo] = conj(a[-j])
    j_lo, j_hi = -(N - 1 - k0), k0 + K - 1
    lags = -np.arange(j_lo, j_hi + 1) * f.dt
    h = np.conj(sample_atoms(w, scales, lags))
    x = np.broadcast_to(f.samples.astype(complex), (scales.size, N))
    full = signal.fftconvolve(x, h, mode="full", axes=1)
    start = k0 - j_lo
    return f.dt * full[:, start : start + K]


def _cwt_direct(f: TimeSeries, w: MotherWavelet, g: TimeScaleGrid) -> np.ndarray:
    t = f.times
    tau = g.translations
    out = np.empty(g.shape, dtype=complex)
    step = max(1, _DIRECT_BLOCK // max(f.size, 1))
    for j, s in enumerate(g.scales):
        for lo in range(0, tau.size, step):
            blk = tau[lo : lo + step]
            atoms = mother_eval(w, (t[None, :] - blk[:, None]) / s) / math.sqrt(s)
            out[j, lo : lo + step] = f.dt * (np.conj(atoms) @ f.samples)
    return out


def _warn_guard(f: TimeSeries, w: MotherWavelet, g: TimeScaleGrid) -> None:
    if f.energy > 0:
        guard_band_warning(*f.energetic_support(), w, g, stacklevel=4)


def guard_band_warning(lo: float, hi: float, w: MotherWavelet, g: TimeScaleGrid, stacklevel: int = 2) -> bool:
    """Warn when ``[lo, hi]`` sits closer than 5 max-scale widths to the translation edges."""
    guard = 5 * w.effective_width * g.s_max
    tau = g.translations
    if lo - guard < tau[0] - 0.5 * g.dtau or hi + guard > tau[-1] + 0.5 * g.dtau:
        warnings.warn(
            f"translation axis [{tau[0]:.4g}, {tau[-1]:.4g}] s leaves less than 5 widths "
            f"({guard:.4g} s) of guard band around the signal support [{lo:.4g}, {hi:.4g}] s",
            stacklevel=stacklevel,
        )
        return True
    return False


def synthesize(F: TimeScaleField, w: MotherWavelet, times_t0: float, fs: float, n: int) -> np.ndarray:
    """Complex sum ``sum_jk w_j dtau psi_{s_j,tau_k}(t) F[j,k]`` on ``n`` samples from ``times_t0``.

    This is the analytic (positive-frequency) synthesis; it is ``C`` times the
    analytic part of the signal whose transform is ``F``.
    """
    g = F.grid
    wts = g.scale_weights * g.dtau
    coeffs = F.values * wts[:, None]
    dt = 1.0 / fs
    k0 = _aligned(g, times_t0, dt)
    if k0 is not None:
        K = g.n_translations
        # out[i] = sum_k a[i - k0 - k] c[k]
        m_lo, m_hi = -k0 - K + 1, n - 1 - k0
        lags = np.arange(m_lo, m_hi + 1) * dt
        atoms = sample_atoms(w, g.scales, lags)
        full = signal.fftconvolve(coeffs, atoms, mode="full", axes=1)
        # (c * a)[p] with p = k + (m - m_lo); m = i - k0 - k  ->  p = i - k0 - m_lo
        start = -k0 - m_lo
        return full[:, start : start + n].sum(axis=0)
    t = times_t0 + np.arange(n) * dt
    tau = g.translations
    out = np.zeros(n, dtype=complex)
    step = max(1, _DIRECT_BLOCK // max(tau.size, 1))
    for j, s in enumerate(g.scales):
        for lo in range(0, n, step):
            tb = t[lo : lo + step]
            atoms = mother_eval(w, (tb[:, None] - tau[None, :]) / s) / math.sqrt(s)
            out[lo : lo + step] += atoms @ coeffs[j]
    return out


def icwt(
    F: TimeScaleField,
    w: MotherWavelet,
    out_t0: float | None = None,
    out_fs: float | None = None,
    out_n: int | None = None,
    real: bool = True,
) -> TimeSeries:
    """Inverse CWT ``(2 / C) Re[synthesis]`` on the requested time axis.

    The default axis is the grid's own translation axis.  The grid must cover
    the signal's energetic scales; energy outside the band is not recovered.
    With ``real=False`` the analytic part ``synthesis / C`` is returned.
    """
    if F.values.size == 0:
        raise ValueError("empty field")
    g = F.grid
    out_t0 = g.tau_start if out_t0 is None else out_t0
    out_fs = 1.0 / g.dtau if out_fs is None else out_fs
    out_n = g.n_translations if out_n is None else out_n
    syn = synthesize(F, w, out_t0, out_fs, out_n) / w.admissibility
    samples = 2.0 * syn.real if real else syn
    return TimeSeries(samples, out_fs, out_t0)


def reproducing_kernel(w: MotherWavelet, a: WaveletAtom, b: WaveletAtom) -> complex:
    """``C**-1 <psi_a, psi_b>`` by frequency-domain quadrature.

    The integrand is ``(s_a s_b)**0.5 Psi(s_a w) Psi(s_b w) exp(-i w (tau_a - tau_b)) / 2 pi``.
    """
    n = w.order
    sa, sb = a.scale, b.scale
    shat = 0.5 * (sa + sb)
    ra, rb = sa / shat, sb / shat
    lag = (a.translation - b.translation) / shat

    def amp(u):
        # Psi(ra u) Psi(rb u) with u = shat * omega; log form avoids overflow
        return np.exp(n * math.log(ra * rb) + 2 * n * np.log(u) - (ra + rb) * u) if u > 0 else 0.0

    opts = dict(epsabs=0.0, epsrel=1e-11, limit=400)
    if lag == 0.0:
        re, _ = integrate.quad(amp, 0.0, np.inf, **opts)
        im = 0.0
    else:
        re, _ = integrate.quad(amp, 0.0, np.inf, weight="cos", wvar=abs(lag), limlst=200)
        im, _ = integrate.quad(amp, 0.0, np.inf, weight="sin", wvar=abs(lag), limlst=200)
        # exp(-i u lag) = cos(u |lag|) - i sign(lag) sin(u |lag|)
        im = -im if lag > 0 else im
    inner = math.sqrt(ra * rb) * complex(re, im) / (2 * math.pi)
    return inner / w.admissibility


def kernel_project(D: TimeScaleField, w: MotherWavelet) -> TimeScaleField:
    """Apply the discretized reproducing-kernel operator to ``D``.

    Implemented as ``C**-1 cwt(synthesis(D))`` on the grid's translation axis,
    which equals ``sum_{j0,k0} w_j0 dtau K(., .|s_j0, tau_k0) D[j0, k0]`` with
    the time integral of the kernel done by the same rectangle rule as cwt.
    """
    g = D.grid
    if not np.all(np.isfinite(D.values)):
        raise ValueError("field has non-finite entries")
    fs = 1.0 / g.dtau
    syn = synthesize(D, w, g.tau_start, fs, g.n_translations)
    x = TimeSeries(syn, fs, g.tau_start)
    return cwt(x, w, g, method="fft", check=False).scaled(1.0 / w.admissibility)


def projection_residual(D: TimeScaleField, w: MotherWavelet) -> float:
    """``||P D - D|| / ||D||``; 0 for the zero field."""
    if field_norm(D) == 0:
        return 0.0
    return relative_deviation(kernel_project(D, w), D)


@dataclass(frozen=True)
class CovarianceReport:
    shift: float
    dilation: float
    shift_deviation: float
    dilation_deviation: float
    points_compared: int

    @property
    def max_deviation(self) -> float:
        return max(self.shift_deviation, self.dilation_deviation)


def covariance_check(
    f: TimeSeries, w: MotherWavelet, g: TimeScaleGrid, shift: float = 0.0, dilation: float = 1.0
) -> CovarianceReport:
    """Compare cwt of shifted/dilated copies of ``f`` with the transformed field of ``f``.

    Checks ``cwt[f(t - shift)](s, tau) = cwt[f](s, tau - shift)`` and
    ``cwt[dilation**-0.5 f(t / dilation)](s, tau) = cwt[f](s / dilation, tau / dilation)``
    on grid points present in both fields.  Deviations are relative to ``max |cwt[f]|``.
    """
    from .interp import resample

    if dilation <= 0:
        raise ValueError("dilation must be positive")
    base = cwt(f, w, g, check=False).values
    peak = np.abs(base).max()
    if peak == 0:
        return CovarianceReport(shift, dilation, 0.0, 0.0, 0)
    t = f.times
    tau = g.translations

    if shift == 0.0:
        shift_dev = 0.0
        n_shift = base.size
    else:
        m = _offset(shift, 0.0, f.dt)
        if m is not None:
            shifted = np.zeros_like(f.samples, dtype=complex)
            if m >= 0:
                shifted[m:] = f.samples[: f.size - m]
            else:
                shifted[:m] = f.samples[-m:]
        else:
            shifted = resample(f, t - shift)
        sh = cwt(f.with_samples(shifted), w, g, check=False).values
        dk = shift / g.dtau
        dki = round(dk)
        if abs(dk - dki) > _ALIGN_TOL:
            raise ValueError("shift must be a multiple of the translation spacing")
        # sh[:, k] <-> base[:, k - dki]
        if dki >= 0:
            a, b = sh[:, dki:], base[:, : base.shape[1] - dki]
        else:
            a, b = sh[:, :dki], base[:, -dki:]
        shift_dev = float(np.abs(a - b).max() / peak) if a.size else 0.0
        n_shift = a.size

    if dilation == 1.0:
        dil_dev = 0.0
        n_dil = base.size
    else:
        dj = math.log2(dilation) * g.voices
        dji = round(dj)
        if abs(dj - dji) > _ALIGN_TOL:
            raise ValueError("dilation must be a power of 2**(1/Q) to align the scale grid")
        warped = resample(f, t / dilation) / math.sqrt(dilation)
        dl = cwt(f.with_samples(warped), w, g, check=False).values
        diffs = []
        for j in range(g.n_scales):
            jb = j - dji
            if not 0 <= jb < g.n_scales:
                continue
            src = tau / dilation
            kb = (src - g.tau_start) / g.dtau
            ok = (np.abs(kb - np.round(kb)) < _ALIGN_TOL) & (kb > -0.5) & (kb < g.n_translations - 0.5)
            kbi = np.round(kb[ok]).astype(int)
            diffs.append(np.abs(dl[j, ok] - base[jb, kbi]))
        d = np.concatenate(diffs) if diffs else np.zeros(0)
        dil_dev = float(d.max() / peak) if d.size else 0.0
        n_dil = d.size
    return CovarianceReport(shift, dilation, shift_dev, dil_dev, min(n_shift, n_dil))
