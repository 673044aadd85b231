"""Echo resolution and channel-kernel construction.

Sounding transmits a real probe atom through the channel and takes the CWT
of what comes back; the reflectivity estimate is ``D* = C**-1 cwt(received)``.
An echo of the probe ``psi_{sigma,0}`` from a ray ``(s0, tau0)`` appears at
scale ``s0 * sigma`` and translation ``tau0``.

A scale sweep (one probe per grid scale) yields the time-domain kernel
``K_c(t, t')`` of the channel, used as an ordinary linear operator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import Channel, channel_apply
from .transform import (
    TimeAxis,
    TimeScaleField,
    TimeScaleGrid,
    TimeSeries,
    cwt,
    cwt_rows,
    guard_band_warning,
)
from .wavelet import MotherWavelet, sample_atoms

PROBE = "probe"
SWEEP = "sweep"


@dataclass(frozen=True)
class ReflectivityEstimate:
    """Sounded field ``D* = C**-1 cwt(received)``.

    ``probe_factor`` is the share of the analytic atom actually transmitted
    (0.5 for a real probe, whose negative-frequency half the CWT ignores).
    ``mode`` is ``"probe"`` for a single probe at ``probe_scale`` or
    ``"sweep"`` when row ``j`` comes from a probe at the row's own scale.
    """

    field: TimeScaleField
    wavelet: MotherWavelet
    probe_scale: float
    mode: str = PROBE
    probe_factor: float = 0.5

    @property
    def source_grid(self) -> TimeScaleGrid:
        return self.field.grid

    @property
    def self_response(self) -> float:
        """Peak of ``|D*|`` produced by an undistorted unit echo of the probe."""
        return self.probe_factor * self.wavelet.norm_sq / self.wavelet.admissibility


@dataclass(frozen=True)
class RayEstimate:
    s0_hat: float
    tau0_hat: float
    amp_hat: float
    peak_value: complex

    @property
    def pr_hat(self) -> float:
        return abs(self.amp_hat) * math.sqrt(self.s0_hat)


def probe_signal(w: MotherWavelet, probe_scale: float, axis: TimeAxis, real: bool = True) -> TimeSeries:
    atom = sample_atoms(w, [probe_scale], axis.times)[0]
    return TimeSeries(atom.real if real else atom, axis.fs, axis.t0)


def sound_channel(
    ch: Channel,
    w: MotherWavelet,
    g: TimeScaleGrid,
    probe_scale: float,
    mode: str = PROBE,
) -> ReflectivityEstimate:
    """Estimate the reflectivity field of ``ch`` on grid ``g``.

    The grid's translation axis doubles as the sampling axis.  In ``"sweep"``
    mode every grid scale is probed separately (one transmission per row,
    noise seeded per row) and only the matching row of each response is kept.
    """
    axis = TimeAxis.of_grid(g)
    g.check_sampling(w, axis.fs)
    if not probe_scale > 0:
        raise ValueError("probe scale must be positive")
    if mode == PROBE:
        if probe_scale * w.effective_width * axis.fs < 4:
            raise ValueError(f"probe scale {probe_scale:.4g} s is not representable at fs={axis.fs:.4g} Hz")
        if not g.s_min <= probe_scale <= g.s_max:
            raise ValueError("probe scale lies outside the grid's scale range")
        probe = probe_signal(w, probe_scale, axis)
        _check_echo_guard(ch, probe, w, g)
        rx = channel_apply(ch, probe)
        if rx.energy <= np.finfo(float).tiny:
            warnings.warn("received energy is zero; returning an empty estimate", stacklevel=2)
        values = cwt(rx, w, g, check=False).values / w.admissibility
    elif mode == SWEEP:
        rows = []
        seed = ch.noise.seed if ch.noise is not None else None
        _check_echo_guard(ch, probe_signal(w, g.s_max, axis), w, g)
        for j, s in enumerate(g.scales):
            rx = channel_apply(ch, probe_signal(w, s, axis), seed=None if seed is None else [seed, j])
            rows.append(cwt_rows(rx, w, g, [s])[0])
        values = np.array(rows) / w.admissibility
        if not np.any(values):
            warnings.warn("received energy is zero; returning an empty estimate", stacklevel=2)
    else:
        raise ValueError(f"unknown sounding mode {mode!r}")
    return ReflectivityEstimate(TimeScaleField(g, values), w, probe_scale, mode)


def _check_echo_guard(ch: Channel, probe: TimeSeries, w: MotherWavelet, g: TimeScaleGrid) -> None:
    if not ch.params:
        return
    lo, hi = probe.energetic_support()
    lo_img = min(p.s0 * lo + p.tau0 for p in ch.params)
    hi_img = max(p.s0 * hi + p.tau0 for p in ch.params)
    guard_band_warning(lo_img, hi_img, w, g, stacklevel=4)


def _vertex(m_minus: float, m0: float, m_plus: float) -> tuple[float, float]:
    """Offset and value of the parabola through three equally spaced samples."""
    den = m_minus - 2 * m0 + m_plus
    if den >= 0:
        return 0.0, m0
    delta = 0.5 * (m_minus - m_plus) / den
    return delta, m0 - 0.25 * (m_minus - m_plus) * delta


def resolve_echoes(est: ReflectivityEstimate, threshold: float = 0.1) -> list[RayEstimate]:
    """Read ray parameters off the strict local maxima of ``|D*|``.

    Peaks must beat all 8 neighbours and reach ``threshold * max|D*|``.  Each
    is refined by a 3-point parabola along log-scale and along translation.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if est.mode != PROBE:
        raise ValueError("echo resolution needs a single-probe estimate")
    mag = np.abs(est.field.values)
    top = mag.max() if mag.size else 0.0
    if top == 0:
        return []
    g = est.field.grid
    J, K = mag.shape
    padded = np.pad(mag, 1, constant_values=-np.inf)
    centre = padded[1:-1, 1:-1]
    is_peak = centre >= threshold * top
    for dj in (-1, 0, 1):
        for dk in (-1, 0, 1):
            if dj == 0 and dk == 0:
                continue
            is_peak &= centre > padded[1 + dj : 1 + dj + J, 1 + dk : 1 + dk + K]

    out = []
    for j, k in zip(*np.nonzero(is_peak)):
        dj, mj = _vertex(mag[j - 1, k], mag[j, k], mag[j + 1, k]) if 0 < j < J - 1 else (0.0, mag[j, k])
        dk, mk = _vertex(mag[j, k - 1], mag[j, k], mag[j, k + 1]) if 0 < k < K - 1 else (0.0, mag[j, k])
        peak_mag = mj + mk - mag[j, k]
        s_hat = g.s_min * 2.0 ** ((j + dj) / g.voices)
        s0_hat = s_hat / est.probe_scale
        tau_hat = g.tau_start + (k + dk) * g.dtau
        pv = complex(est.field.values[j, k])
        sign = -1.0 if pv.real < 0 else 1.0
        pr_hat = peak_mag / est.self_response
        out.append(RayEstimate(s0_hat, tau_hat, sign * pr_hat / math.sqrt(s0_hat), pv))
    out.sort(key=lambda r: (-abs(r.peak_value), r.tau0_hat, r.s0_hat))
    return out


@dataclass(frozen=True)
class ChannelKernel:
    """Discretized ``K_c[t, t']`` on ``out_axis x in_axis``."""

    matrix: np.ndarray = field(repr=False)
    out_axis: TimeAxis
    in_axis: TimeAxis

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.out_axis.n, self.in_axis.n):
            raise ValueError("kernel matrix does not match its axes")
        if not np.all(np.isfinite(m)):
            raise ValueError("kernel entries must be finite")


def impulse_response(est: ReflectivityEstimate) -> np.ndarray:
    """Analytic impulse response ``h+(lag)`` on the grid's translation axis.

    ``h+(lag) = C**-1 sum_j w_j cwt[S psi_{s_j,0}](s_j, lag)``, which equals
    the kernel ``C**-1 iint ds dtau / s**2 (S psi_{s,tau})(t) conj(psi_{s,tau}(t'))``
    evaluated at ``t - t' = lag`` for a translation-invariant channel.
    """
    if est.mode != SWEEP:
        raise ValueError("the channel kernel needs a scale-sweep estimate (mode='sweep')")
    g = est.field.grid
    return (g.scale_weights[:, None] * est.field.values).sum(axis=0) / est.probe_factor


def build_channel_kernel(
    est: ReflectivityEstimate, out_axis: TimeAxis, in_axis: TimeAxis, real: bool = True
) -> ChannelKernel:
    """Channel kernel from a scale sweep; ``real=True`` gives ``2 Re h+`` for real systems."""
    g = est.field.grid
    if abs(out_axis.fs - in_axis.fs) > 1e-9 * in_axis.fs:
        raise ValueError("input and output axes need the same sample rate")
    h = impulse_response(est)
    if not np.any(h):
        dtype = float if real else complex
        return ChannelKernel(np.zeros((out_axis.n, in_axis.n), dtype), out_axis, in_axis)

    tau = g.translations
    lag_lo = out_axis.times[0] - in_axis.times[-1]
    lag_hi = out_axis.times[-1] - in_axis.times[0]
    p = np.abs(h) ** 2
    c = np.cumsum(p) / p.sum()
    sup_lo = tau[np.searchsorted(c, 0.5e-4)]
    sup_hi = tau[min(np.searchsorted(c, 1 - 0.5e-4), tau.size - 1)]
    if sup_lo < lag_lo - g.dtau or sup_hi > lag_hi + g.dtau:
        raise ValueError(
            f"axes cover lags [{lag_lo:.4g}, {lag_hi:.4g}] s but the channel response "
            f"occupies [{sup_lo:.4g}, {sup_hi:.4g}] s"
        )

    lags = out_axis.times[:, None] - in_axis.times[None, :]
    pos = (lags - g.tau_start) / g.dtau
    inside = (pos >= 0) & (pos <= g.n_translations - 1)
    if np.all(np.abs(pos - np.round(pos)) < 1e-6):
        idx = np.clip(np.round(pos).astype(np.int64), 0, g.n_translations - 1)
        vals = h[idx]
    else:
        vals = np.interp(pos, np.arange(tau.size), h.real) + 1j * np.interp(pos, np.arange(tau.size), h.imag)
    vals = np.where(inside, vals, 0.0)
    matrix = 2.0 * vals.real if real else vals
    return ChannelKernel(matrix, out_axis, in_axis)


def linear_apply(K: ChannelKernel, x: TimeSeries) -> TimeSeries:
    """``y[t] = sum_t' K[t, t'] x[t'] dt``."""
    if not K.in_axis.matches(x):
        raise ValueError("signal is not on the kernel's input axis")
    y = (K.matrix @ x.samples) * x.dt
    return TimeSeries(y, K.out_axis.fs, K.out_axis.t0)
