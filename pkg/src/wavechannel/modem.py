"""Scale-diversity modem on an orthonormal dyadic Haar basis.

Each bit occupies one frame of ``2**(m0 + M - 1)`` samples and is sent
antipodally on one Haar atom at every level ``m0 .. m0 + M - 1``, all
starting at the frame origin.  Atoms at different levels are orthogonal, so
the receiver correlates per level and combines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .channel import Channel, channel_apply
from .transform import TimeSeries

EQUAL_GAIN = "equal-gain"
MAX_RATIO = "max-ratio"


@dataclass(frozen=True)
class ModemConfig:
    scales_used: int = 4
    base_scale: int = 1
    symbol_rate: float = 1e6
    basis: str = "haar"
    combiner: str = EQUAL_GAIN

    def __post_init__(self):
        if self.scales_used < 1:
            raise ValueError("need at least one scale")
        if self.base_scale < 1:
            raise ValueError("Haar atoms need base level >= 1 (two samples)")
        if not self.symbol_rate > 0:
            raise ValueError("symbol rate must be positive")
        if self.basis != "haar":
            raise ValueError(f"unsupported basis {self.basis!r}")
        if self.combiner not in (EQUAL_GAIN, MAX_RATIO):
            raise ValueError(f"unknown combiner {self.combiner!r}")
        gram = self.gram()
        err = np.abs(gram - np.eye(gram.shape[0])).max()
        if err > 1e-8:
            raise ValueError(f"basis is not orthonormal (Gram error {err:.2e})")

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.base_scale, self.base_scale + self.scales_used)

    @property
    def frame_len(self) -> int:
        return 2 ** int(self.levels[-1])

    @property
    def fs(self) -> float:
        return self.symbol_rate * self.frame_len

    def atoms(self) -> np.ndarray:
        """Unit-energy frame atoms, shape ``(M, frame_len)``, continuous-time normalized."""
        L = self.frame_len
        out = np.zeros((self.scales_used, L))
        for i, m in enumerate(self.levels):
            n = 2 ** int(m)
            out[i, : n // 2] = 1.0
            out[i, n // 2 : n] = -1.0
            out[i] *= 2.0 ** (-m / 2)
        return out * math.sqrt(self.fs)

    def gram(self) -> np.ndarray:
        A = self.atoms()
        # two frames so that shifted copies are checked as well
        L = self.frame_len
        two = np.zeros((2 * A.shape[0], 2 * L))
        two[: A.shape[0], :L] = A
        two[A.shape[0] :, L:] = A
        return two @ two.T / self.fs


@dataclass(frozen=True)
class BitStream:
    bits: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 1 or not np.all((b == 0) | (b == 1)):
            raise ValueError("bits must be a 1-D array of 0/1")
        b = b.astype(np.int8)
        b.flags.writeable = False
        object.__setattr__(self, "bits", b)

    @classmethod
    def random(cls, n: int, seed: int) -> "BitStream":
        rng = np.random.default_rng(seed)
        return cls(rng.integers(0, 2, n), seed)

    def __len__(self) -> int:
        return self.bits.size

    def complement(self) -> "BitStream":
        return BitStream(1 - self.bits, self.seed)


def modulate(cfg: ModemConfig, bits: BitStream, t0: float = 0.0) -> TimeSeries:
    """Antipodal waveform with unit energy per bit split evenly over the M levels."""
    if len(bits) == 0:
        raise ValueError("nothing to transmit")
    sym = 2.0 * bits.bits - 1.0
    frame = cfg.atoms().sum(axis=0) / math.sqrt(cfg.scales_used)
    x = (sym[:, None] * frame[None, :]).ravel()
    return TimeSeries(x, cfg.fs, t0)


def correlate(cfg: ModemConfig, y: TimeSeries, n_bits: int | None = None) -> np.ndarray:
    """Per-level statistics ``<w_m,n, y>``, shape ``(n_bits, M)``."""
    L = cfg.frame_len
    if n_bits is None:
        if y.size % L:
            raise ValueError(f"signal length {y.size} is not a whole number of {L}-sample frames")
        n_bits = y.size // L
    if y.size < n_bits * L:
        raise ValueError("signal shorter than the frame")
    frames = np.asarray(y.samples[: n_bits * L].real).reshape(n_bits, L)
    return frames @ cfg.atoms().T / cfg.fs


def combine(cfg: ModemConfig, z: np.ndarray) -> np.ndarray:
    if cfg.combiner == EQUAL_GAIN:
        return z.sum(axis=1)
    # weights ~ mean / variance of each level's magnitude (decision-free estimate)
    mu = np.abs(z).mean(axis=0)
    var = np.abs(z).var(axis=0)
    wts = np.where(var > 0, mu / np.where(var > 0, var, 1.0), 1.0)
    if np.all(var == 0):
        wts = np.ones_like(mu)
    return z @ wts


def demodulate(cfg: ModemConfig, y: TimeSeries, n_bits: int | None = None) -> BitStream:
    """Sign decision on the combined statistic; exact zeros decode as 0.

    Assumes ``y`` starts at the first frame boundary.
    """
    stat = combine(cfg, correlate(cfg, y, n_bits))
    return BitStream((stat > 0).astype(np.int8))


def q_function(x):
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def antipodal_ber(ebn0_db: float) -> float:
    return float(q_function(math.sqrt(2.0 * 10.0 ** (ebn0_db / 10.0))))


@dataclass(frozen=True)
class BerReport:
    snr_db: float
    n_bits: int
    n_errors: int
    scale_snr_db: tuple[float, ...] = field(default=())

    @property
    def ber(self) -> float:
        return self.n_errors / self.n_bits


def _scale_snr(z: np.ndarray, sym: np.ndarray) -> tuple[float, ...]:
    signed = z * sym[:, None]
    mu = signed.mean(axis=0)
    var = signed.var(axis=0)
    out = []
    for m, v in zip(mu, var):
        if v == 0:
            out.append(math.inf if m != 0 else -math.inf)
        elif m <= 0:
            out.append(-math.inf)
        else:
            out.append(10 * math.log10(m * m / v))
    return tuple(out)


def ber_run(
    cfg: ModemConfig,
    ch: Channel | None,
    n_bits: int,
    snr_db: float | None,
    seed: int,
) -> BerReport:
    """Monte-Carlo bit error count over ``ch`` with AWGN at ``snr_db`` Eb/N0.

    ``ch=None`` is the identity channel and ``snr_db=None`` disables noise.
    The receiver is synchronized to the earliest ray, rounded to whole
    samples; the channel's own noise spec is ignored in favour of Eb/N0.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    ss = np.random.SeedSequence(seed)
    bit_seed, noise_seed = ss.spawn(2)
    bits = BitStream(np.random.default_rng(bit_seed).integers(0, 2, n_bits), seed)
    x = modulate(cfg, bits)
    if ch is None:
        y = x.samples.astype(float)
    else:
        ch = ch.noiseless()
        if not ch.params:
            y = np.zeros(x.size)
        else:
            lag = round(min(p.tau0 for p in ch.params) * x.fs)
            pad = x.size
            rx = channel_apply(ch, x, out_t0=x.t0, out_n=x.size + pad)
            y = np.asarray(rx.samples[lag : lag + x.size]).real
    if snr_db is not None:
        n0 = 10.0 ** (-snr_db / 10.0)
        sigma = math.sqrt(n0 * x.fs / 2.0)
        y = y + sigma * np.random.default_rng(noise_seed).standard_normal(y.size)
    z = correlate(cfg, TimeSeries(y, x.fs, x.t0), n_bits)
    decided = (combine(cfg, z) > 0).astype(np.int8)
    n_err = int(np.count_nonzero(decided != bits.bits))
    sym = 2.0 * bits.bits - 1.0
    return BerReport(float("nan") if snr_db is None else float(snr_db), n_bits, n_err, _scale_snr(z, sym))
