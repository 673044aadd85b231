"""Kaiser-windowed sinc interpolation of sampled waveforms at arbitrary instants."""

from __future__ import annotations

import numpy as np

DEFAULT_TAPS = 16
DEFAULT_BETA = 8.0


def resample(x, t_query, taps: int = DEFAULT_TAPS, beta: float = DEFAULT_BETA) -> np.ndarray:
    """Band-limited estimate of ``x`` at ``t_query``; ``x`` is zero outside its samples.

    Query points that coincide with sample instants return the sample exactly.
    """
    if taps < 2 or taps % 2:
        raise ValueError("taps must be an even integer >= 2")
    t_query = np.asarray(t_query, dtype=float)
    u = (t_query - x.t0) * x.fs
    half = taps // 2
    base = np.floor(u).astype(np.int64)
    frac = u - base
    offsets = np.arange(-half + 1, half + 1)
    idx = base[..., None] + offsets
    d = frac[..., None] - offsets
    arg = np.clip(d / half, -1.0, 1.0)
    win = np.i0(beta * np.sqrt(1.0 - arg**2)) / np.i0(beta)
    kern = np.sinc(d) * win
    valid = (idx >= 0) & (idx < x.size)
    vals = np.where(valid, x.samples[np.clip(idx, 0, x.size - 1)], 0.0)
    out = np.sum(kern * vals, axis=-1)
    # exact on-sample queries (sinc(0)=1, other taps vanish up to rounding)
    on = np.abs(frac) < 1e-12
    if np.any(on):
        bi = base[on]
        inside = (bi >= 0) & (bi < x.size)
        exact = np.zeros(bi.shape, dtype=out.dtype)
        exact[inside] = x.samples[bi[inside]]
        out[on] = exact
    return out
