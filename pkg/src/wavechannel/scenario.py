"""Scenario configuration files (JSON) for the command-line tools."""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .channel import C_LIGHT, Channel, NoiseSpec, Ray
from .modem import EQUAL_GAIN, ModemConfig
from .transform import TimeScaleGrid
from .wavelet import MotherWavelet


class ScenarioError(ValueError):
    """Configuration could not be parsed or validated."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RaySpec(_Strict):
    r10_m: float = Field(ge=0)
    r20_m: float = Field(ge=0)
    v1_mps: float = 0.0
    v2_mps: float = 0.0
    pr: float = Field(1.0, ge=0, le=1)


class NoiseModel(_Strict):
    snr_db: float
    seed: int = 0


class ChannelSpec(_Strict):
    c: float = Field(C_LIGHT, gt=0)
    rays: list[RaySpec] = []
    noise: NoiseModel | None = None
    path_loss: bool = False

    def build(self) -> Channel:
        rays = tuple(Ray(r.r10_m, r.r20_m, r.v1_mps, r.v2_mps, r.pr) for r in self.rays)
        noise = NoiseSpec(self.noise.snr_db, self.noise.seed) if self.noise else None
        return Channel(rays, self.c, noise, self.path_loss)


class WaveletSpec(_Strict):
    order: int = Field(3, ge=1)


class GridSpec(_Strict):
    s_min: float = Field(gt=0)
    octaves: int = Field(6, ge=1)
    voices: int = Field(8, ge=1)
    fs_hz: float = Field(gt=0)
    duration_s: float = Field(gt=0)
    t0_s: float = 0.0

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.fs_hz))

    def build(self) -> TimeScaleGrid:
        return TimeScaleGrid(
            self.s_min, self.octaves, self.voices, self.n_samples, 1.0 / self.fs_hz, self.t0_s
        )


class ProbeSpec(_Strict):
    scale: float = Field(gt=0)
    mode: str = "probe"

    @field_validator("mode")
    @classmethod
    def _mode(cls, v):
        if v not in ("probe", "sweep"):
            raise ValueError("mode must be 'probe' or 'sweep'")
        return v


class ModemSpec(_Strict):
    scales_used: int = Field(4, ge=1)
    base_scale: int = Field(1, ge=1)
    symbol_rate: float = Field(1e6, gt=0)
    basis: str = "haar"
    combiner: str = EQUAL_GAIN

    def build(self) -> ModemConfig:
        return ModemConfig(self.scales_used, self.base_scale, self.symbol_rate, self.basis, self.combiner)


class PulseSpec(_Strict):
    """Gaussian-windowed cosine used as the round-trip reference signal."""

    center_rad_s: float = Field(gt=0)
    bandwidth_rad_s: float = Field(gt=0)
    t_center_s: float = 0.0


class OutputSpec(_Strict):
    dir: str = "out"


class Scenario(_Strict):
    channel: ChannelSpec = ChannelSpec()
    wavelet: WaveletSpec = WaveletSpec()
    grid: GridSpec | None = None
    probe: ProbeSpec | None = None
    modem: ModemSpec | None = None
    pulse: PulseSpec | None = None
    outputs: OutputSpec = OutputSpec()

    def require_grid(self) -> GridSpec:
        if self.grid is None:
            raise ScenarioError("scenario has no 'grid' section")
        return self.grid

    def mother(self) -> MotherWavelet:
        return MotherWavelet(self.wavelet.order)


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file, raising ScenarioError with a located diagnostic."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    try:
        sc = Scenario.model_validate(data)
        # module-level invariants (subluminal rays, grid shape, wavelet order)
        sc.channel.build()
        if sc.grid is not None:
            sc.grid.build()
        sc.mother()
        if sc.modem is not None:
            sc.modem.build()
    except ValidationError as exc:
        lines = [f"{path}: invalid scenario"]
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"])
            lines.append(f"  {loc}: {err['msg']}")
        raise ScenarioError("\n".join(lines)) from exc
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: invalid scenario: {exc}") from exc
    return sc
