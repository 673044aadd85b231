"""CSV and PGM file formats.

Field CSV::

    # wavechannel-field
    # grid s_min=... octaves=... voices=... n_translations=... dtau=... tau_start=...
    # wavelet order=3
    # probe scale=... mode=probe factor=0.5
    scale\\tau,<tau_0>,<tau_1>,...
    <s_0>,<re+imi>,<re+imi>,...

Numbers are written with ``repr`` (shortest round-trip form), so reading a
written field back is lossless.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .transform import TimeScaleField, TimeScaleGrid, TimeSeries

FIELD_MAGIC = "# wavechannel-field"


class FormatError(ValueError):
    """File content does not follow the expected layout."""


def fnum(x) -> str:
    return repr(float(x))


def format_complex(z) -> str:
    z = complex(z)
    im = repr(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{z.real!r}{im}i"


def parse_complex(text: str) -> complex:
    s = text.strip()
    # split at the last sign that is neither leading nor an exponent sign
    cut = next((i for i in range(len(s) - 1, 0, -1) if s[i] in "+-" and s[i - 1] not in "eE"), None)
    if cut is None or not s.endswith("i"):
        raise FormatError(f"not a complex literal: {text!r}")
    try:
        return complex(float(s[:cut]), float(s[cut:-1]))
    except ValueError as exc:
        raise FormatError(f"not a complex literal: {text!r}") from exc


@dataclass(frozen=True)
class FieldFile:
    field: TimeScaleField
    order: int | None = None
    probe_scale: float | None = None
    mode: str | None = None
    probe_factor: float | None = None


def write_field(path: str | Path, F: TimeScaleField, order: int | None = None,
                probe_scale: float | None = None, mode: str | None = None,
                probe_factor: float | None = None) -> None:
    g = F.grid
    lines = [
        FIELD_MAGIC,
        f"# grid s_min={fnum(g.s_min)} octaves={g.octaves} voices={g.voices} "
        f"n_translations={g.n_translations} dtau={fnum(g.dtau)} tau_start={fnum(g.tau_start)}",
    ]
    if order is not None:
        lines.append(f"# wavelet order={order}")
    if probe_scale is not None:
        lines.append(f"# probe scale={fnum(probe_scale)} mode={mode} factor={fnum(probe_factor)}")
    lines.append("scale\\tau," + ",".join(fnum(t) for t in g.translations))
    for s, row in zip(g.scales, F.values):
        lines.append(fnum(s) + "," + ",".join(format_complex(z) for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _kv(text: str) -> dict[str, str]:
    out = {}
    for tok in text.split():
        if "=" not in tok:
            raise FormatError(f"bad header token {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def read_field(path: str | Path) -> FieldFile:
    """Parse a field CSV, checking the axes against the declared grid."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read field: {exc.strerror}") from exc
    lines = text.splitlines()
    if not lines or lines[0].strip() != FIELD_MAGIC:
        raise FormatError(f"{path}: missing '{FIELD_MAGIC}' header")
    meta: dict[str, dict[str, str]] = {}
    body = []
    for ln in lines[1:]:
        if ln.startswith("#"):
            parts = ln[1:].strip().split(None, 1)
            if parts:
                meta[parts[0]] = _kv(parts[1] if len(parts) > 1 else "")
        elif ln.strip():
            body.append(ln)
    if "grid" not in meta:
        raise FormatError(f"{path}: missing grid header")
    try:
        gm = meta["grid"]
        grid = TimeScaleGrid(
            float(gm["s_min"]), int(gm["octaves"]), int(gm["voices"]),
            int(gm["n_translations"]), float(gm["dtau"]), float(gm["tau_start"]),
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad grid header: {exc}") from exc

    rows = list(csv.reader(body))
    if not rows:
        raise FormatError(f"{path}: no axis row")
    try:
        taus = np.array([float(v) for v in rows[0][1:]])
        scales = np.array([float(r[0]) for r in rows[1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric axis value: {exc}") from exc
    if taus.size != grid.n_translations or not np.allclose(taus, grid.translations, rtol=0,
                                                           atol=1e-9 * grid.dtau):
        raise FormatError(f"{path}: translation axis does not match the grid header")
    if scales.size != grid.n_scales or not np.allclose(scales, grid.scales, rtol=1e-12, atol=0):
        raise FormatError(f"{path}: scale axis does not match the grid header "
                          f"(expected {grid.n_scales} log-spaced scales from {grid.s_min!r})")
    values = np.empty(grid.shape, dtype=complex)
    for j, r in enumerate(rows[1:]):
        if len(r) != grid.n_translations + 1:
            raise FormatError(f"{path}: row {j} has {len(r) - 1} cells, expected {grid.n_translations}")
        values[j] = [parse_complex(c) for c in r[1:]]
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: non-finite field entries")

    order = int(meta["wavelet"]["order"]) if "wavelet" in meta else None
    probe = meta.get("probe")
    return FieldFile(
        TimeScaleField(grid, values),
        order,
        float(probe["scale"]) if probe else None,
        probe.get("mode") if probe else None,
        float(probe["factor"]) if probe else None,
    )


RAY_COLUMNS = ["s0_hat", "tau0_hat_s", "amp_hat", "pr_hat", "peak_value"]


def write_rays(path: str | Path, rays) -> None:
    lines = [",".join(RAY_COLUMNS)]
    for r in rays:
        lines.append(",".join([fnum(r.s0_hat), fnum(r.tau0_hat), fnum(r.amp_hat),
                               fnum(r.pr_hat), format_complex(r.peak_value)]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_rays(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append({
            "s0_hat": float(r["s0_hat"]),
            "tau0_hat": float(r["tau0_hat_s"]),
            "amp_hat": float(r["amp_hat"]),
            "pr_hat": float(r["pr_hat"]),
            "peak_value": parse_complex(r["peak_value"]),
        })
    return out


def write_signal(path: str | Path, x: TimeSeries) -> None:
    cplx = np.iscomplexobj(x.samples)
    lines = ["t_s,value"]
    for t, v in zip(x.times, x.samples):
        lines.append(fnum(t) + "," + (format_complex(v) if cplx else fnum(v)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_signal(path: str | Path) -> TimeSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["t_s", "value"]:
        raise FormatError(f"{path}: expected header 't_s,value'")
    try:
        t = np.array([float(r[0]) for r in rows[1:]])
        vals = [r[1] for r in rows[1:]]
        if any(v.endswith("i") for v in vals):
            samples = np.array([parse_complex(v) for v in vals])
        else:
            samples = np.array([float(v) for v in vals])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: bad signal row: {exc}") from exc
    if t.size < 2:
        raise FormatError(f"{path}: need at least two samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt.mean(), rtol=1e-6, atol=0):
        raise FormatError(f"{path}: samples are not uniformly spaced")
    return TimeSeries(samples, 1.0 / dt.mean(), t[0])


def write_ber(path: str | Path, reports) -> None:
    n_scales = max((len(r.scale_snr_db) for r in reports), default=0)
    header = ["snr_db", "n_bits", "n_errors", "ber"] + [f"scale{m}_snr_db" for m in range(n_scales)]
    lines = [",".join(header)]
    for r in reports:
        snr = "inf" if math.isnan(r.snr_db) else fnum(r.snr_db)
        cells = [snr, str(r.n_bits), str(r.n_errors), fnum(r.ber)] + [fnum(v) for v in r.scale_snr_db]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_pgm(path: str | Path, F: TimeScaleField) -> None:
    """8-bit binary PGM of ``|F|``, one image row per scale (smallest scale on top)."""
    mag = np.abs(F.values)
    top = mag.max()
    img = np.zeros(mag.shape, dtype=np.uint8) if top == 0 else np.round(255 * mag / top).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + img.tobytes())
