"""Parametric multipath channel of moving specular rays.

Each ray maps the transmitted waveform ``x`` to ``amp * x((t - tau0) / s0)``:
a true time dilation (wideband Doppler) plus delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .interp import DEFAULT_TAPS, resample
from .transform import TimeSeries

C_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class Ray:
    """Single-bounce path Tx -> reflector -> Rx.

    ``r10``/``r20`` are the initial Tx-reflector and reflector-Rx ranges in
    metres, ``v1``/``v2`` their rates of change in m/s, ``pr`` the reflection
    coefficient.
    """

    r10: float
    r20: float
    v1: float = 0.0
    v2: float = 0.0
    pr: float = 1.0

    def __post_init__(self):
        for name in ("r10", "r20", "v1", "v2", "pr"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"ray {name} must be finite")
        if self.r10 < 0 or self.r20 < 0:
            raise ValueError("ranges must be non-negative")
        if not 0.0 <= self.pr <= 1.0:
            raise ValueError(f"reflection coefficient must lie in [0, 1], got {self.pr}")


@dataclass(frozen=True)
class TimeScaleParams:
    s0: float
    tau0: float
    amp: float


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float
    seed: int = 0


@dataclass(frozen=True)
class Channel:
    rays: tuple[Ray, ...] = ()
    c: float = C_LIGHT
    noise: NoiseSpec | None = None
    path_loss: bool = False
    taps: int = DEFAULT_TAPS
    params: tuple[TimeScaleParams, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(self.rays))
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError("propagation speed must be positive")
        for r in self.rays:
            if abs(r.v1) >= self.c or abs(r.v2) >= self.c:
                raise ValueError(f"ray speeds must be subluminal (|v| < c): {r}")
        params = tuple(ray_to_timescale(r, self.c, self.path_loss) for r in self.rays)
        object.__setattr__(self, "params", params)

    def noiseless(self) -> "Channel":
        return Channel(self.rays, self.c, None, self.path_loss, self.taps)


def ray_to_timescale(r: Ray, c: float = C_LIGHT, path_loss: bool = False) -> TimeScaleParams:
    """Scale, delay and amplitude of one ray.

    ``s0 = (c + v1)(c + v2) / c**2``, ``tau0 = (r10 + r20) / c + r10 v2 / c**2``,
    ``amp = pr / sqrt(s0)``; with ``path_loss`` the amplitude is further divided
    by ``4 pi (r10 + r20)``.
    """
    if r.v1 <= -c or r.v2 <= -c:
        raise ValueError("v1, v2 must exceed -c for a positive scale")
    b1, b2 = r.v1 / c, r.v2 / c
    s0 = (1.0 + b1) * (1.0 + b2)
    tau0 = (r.r10 + r.r20) / c + r.r10 * r.v2 / c**2
    amp = r.pr / math.sqrt(s0)
    if path_loss:
        L = 4 * math.pi * (r.r10 + r.r20)
        if L > 0:
            amp /= L
    return TimeScaleParams(s0, tau0, amp)


def delay_of_reception(r: Ray, t, c: float = C_LIGHT):
    """Total delay ``d(t)`` of the signal received at ``t`` along ``r``.

    Direct evaluation of the kinematic solution of
    ``d1 = R1(t - d) / c`` and ``d2 = R2(t - d2) / c``.
    """
    t = np.asarray(t, dtype=float)
    v1, v2 = r.v1, r.v2
    num = t * (v2 * (c + v1) + v1 * (c + v2) - v1 * v2) + r.r20 * (c + v1) + r.r10 * (c + v2) - v1 * r.r20
    return num / ((c + v1) * (c + v2))


def _ray_output(x: TimeSeries, p: TimeScaleParams, t_out: np.ndarray, taps: int) -> np.ndarray:
    if p.s0 == 1.0 and p.tau0 == 0.0 and np.array_equal(t_out, x.times):
        return p.amp * x.samples
    return p.amp * resample(x, (t_out - p.tau0) / p.s0, taps=taps)


def channel_apply(
    ch: Channel,
    x: TimeSeries,
    out_t0: float | None = None,
    out_n: int | None = None,
    seed: int | None = None,
) -> TimeSeries:
    """Received waveform ``sum_r amp_r x((t - tau0_r) / s0_r)`` plus optional AWGN.

    The output uses the sample rate of ``x`` and by default its time axis.  The
    image of the energetic support of ``x`` under every ray must fit inside the
    output window.  Noise power is the mean signal power over the output
    window divided by ``10**(snr_db / 10)``; ``seed`` overrides the channel's.
    """
    out_t0 = x.t0 if out_t0 is None else out_t0
    out_n = x.size if out_n is None else out_n
    t_out = out_t0 + np.arange(out_n) / x.fs
    lo, hi = x.energetic_support()
    for p in ch.params:
        img_lo, img_hi = p.s0 * lo + p.tau0, p.s0 * hi + p.tau0
        if img_lo < t_out[0] or img_hi > t_out[-1]:
            raise ValueError(
                f"echo (s0={p.s0:.6g}, tau0={p.tau0:.6g} s) occupies [{img_lo:.6g}, {img_hi:.6g}] s, "
                f"outside the output window [{t_out[0]:.6g}, {t_out[-1]:.6g}] s; "
                f"required window [{min(img_lo, t_out[0]):.6g}, {max(img_hi, t_out[-1]):.6g}] s"
            )
    dtype = complex if np.iscomplexobj(x.samples) else float
    y = np.zeros(out_n, dtype=dtype)
    for p in ch.params:
        y += _ray_output(x, p, t_out, ch.taps)
    if ch.noise is not None:
        rng = np.random.default_rng(ch.noise.seed if seed is None else seed)
        y = y + awgn(y, ch.noise.snr_db, rng)
    return TimeSeries(y, x.fs, out_t0)


def awgn(y: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Real white Gaussian noise at ``snr_db`` below the mean power of ``y``."""
    power = float(np.mean(np.abs(y) ** 2))
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    return sigma * rng.standard_normal(y.shape)


@dataclass(frozen=True)
class MonotonicityReport:
    ds0_dv1: float
    ds0_dv2: float
    fd_dv1: float
    fd_dv2: float
    max_rel_error: float

    @property
    def ok(self) -> bool:
        return self.ds0_dv1 > 0 and self.ds0_dv2 > 0 and self.fd_dv1 > 0 and self.fd_dv2 > 0


def doppler_monotonicity_check(r: Ray, c: float = C_LIGHT, rel_step: float = 1e-4) -> MonotonicityReport:
    """Compare analytic ``ds0/dv`` with central differences of ``ray_to_timescale``."""
    h = rel_step * c
    a1 = (c + r.v2) / c**2
    a2 = (c + r.v1) / c**2

    def s0(v1, v2):
        return ray_to_timescale(Ray(r.r10, r.r20, v1, v2, r.pr), c).s0

    # keep the stencil inside (-c, c)
    h1 = min(h, 0.5 * (c - abs(r.v1)))
    h2 = min(h, 0.5 * (c - abs(r.v2)))
    f1 = (s0(r.v1 + h1, r.v2) - s0(r.v1 - h1, r.v2)) / (2 * h1)
    f2 = (s0(r.v1, r.v2 + h2) - s0(r.v1, r.v2 - h2)) / (2 * h2)
    err = max(abs(f1 - a1) / a1, abs(f2 - a2) / a2)
    return MonotonicityReport(a1, a2, f1, f2, err)
