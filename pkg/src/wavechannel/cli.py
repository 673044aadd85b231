"""Command-line front end.

Exit codes: 0 success, 1 configuration or parse error, 2 numerical tolerance failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import formats
from .channel import Channel, NoiseSpec
from .modem import ModemConfig, ber_run
from .scenario import Scenario, ScenarioError, load_scenario
from .sounding import ReflectivityEstimate, resolve_echoes, sound_channel
from .transform import TimeAxis, TimeSeries, cwt, icwt, projection_residual
from .wavelet import MotherWavelet, admissibility, admissibility_quadrature

KERNEL_TOL = 0.05
ROUND_TRIP_TOL = 1e-2


class UsageError(Exception):
    pass


class ToleranceError(Exception):
    pass


def _out_dir(args, sc: Scenario | None = None) -> Path:
    d = Path(args.out_dir) if args.out_dir else Path(sc.outputs.dir if sc else ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_wavelet_info(args) -> int:
    try:
        w = MotherWavelet(args.order)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    c_closed = admissibility(w)
    c_quad = admissibility_quadrature(w)
    agree = abs(c_quad - c_closed) <= 1e-6 * c_closed
    print(f"order            {w.order}")
    print(f"C (closed form)  {c_closed:.12g}")
    print(f"C (quadrature)   {c_quad:.12g}")
    print(f"agreement        {str(agree).lower()}")
    print(f"norm^2           {w.norm_sq:.12g}")
    print(f"effective width  {w.effective_width:.12g}")
    return 0 if agree else 2


def _channel_with_overrides(sc: Scenario, args) -> Channel:
    """Scenario channel with ``--snr-db`` / ``--seed`` applied to its noise spec."""
    ch = sc.channel.build()
    base = ch.noise
    snr = args.snr_db if args.snr_db is not None else (base.snr_db if base else None)
    if snr is None:
        return ch
    seed = args.seed if args.seed is not None else (base.seed if base else 0)
    return Channel(ch.rays, ch.c, NoiseSpec(float(snr), seed), ch.path_loss, ch.taps)


def _write_estimate(d: Path, est: ReflectivityEstimate, rays) -> None:
    formats.write_field(d / "field.csv", est.field, est.wavelet.order, est.probe_scale, est.mode,
                        est.probe_factor)
    formats.write_pgm(d / "heatmap.pgm", est.field)
    if rays is not None:
        formats.write_rays(d / "rays.csv", rays)


def cmd_sound(args) -> int:
    sc = load_scenario(args.scenario)
    if sc.probe is None:
        raise ScenarioError(f"{args.scenario}: scenario has no 'probe' section")
    ch = _channel_with_overrides(sc, args)
    w = sc.mother()
    try:
        est = sound_channel(ch, w, sc.require_grid().build(), sc.probe.scale, sc.probe.mode)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    rays = resolve_echoes(est, args.threshold) if est.mode == "probe" else None
    d = _out_dir(args, sc)
    _write_estimate(d, est, rays)
    print(f"field    {d / 'field.csv'}")
    if rays is not None:
        print(f"rays     {len(rays)} resolved -> {d / 'rays.csv'}")
        for r in rays:
            print(f"  s0={r.s0_hat:.6f} tau0={r.tau0_hat:.6e} s amp={r.amp_hat:.4f}")
    if est.mode == "probe" and ch.noise is None:
        ratio = projection_residual(est.field, w)
        print(f"kernel residual {ratio:.6e}")
        if ratio > KERNEL_TOL:
            raise ToleranceError(f"kernel residual {ratio:.4g} exceeds {KERNEL_TOL}")
    return 0


def _estimate_from_file(path: str, order: int | None) -> ReflectivityEstimate:
    ff = formats.read_field(path)
    w = MotherWavelet(order or ff.order or 3)
    if ff.probe_scale is None:
        raise UsageError(f"{path}: field carries no probe header")
    return ReflectivityEstimate(ff.field, w, ff.probe_scale, ff.mode or "probe", ff.probe_factor or 0.5)


def cmd_resolve(args) -> int:
    est = _estimate_from_file(args.field, args.order)
    rays = resolve_echoes(est, args.threshold)
    d = _out_dir(args)
    formats.write_rays(d / "rays.csv", rays)
    print(f"rays     {len(rays)} resolved -> {d / 'rays.csv'}")
    return 0


def cmd_kernel_check(args) -> int:
    ff = formats.read_field(args.field)
    w = MotherWavelet(args.order or ff.order or 3)
    ratio = projection_residual(ff.field, w)
    ok = ratio <= KERNEL_TOL
    print(f"||PD - D|| / ||D|| = {ratio!r}")
    print(f"tolerance          = {KERNEL_TOL!r}")
    print(f"consistent         = {str(ok).lower()}")
    return 0 if ok else 2


def cmd_reconstruct(args) -> int:
    ff = formats.read_field(args.field)
    w = MotherWavelet(args.order or ff.order or 3)
    x = icwt(ff.field, w)
    d = _out_dir(args)
    formats.write_signal(d / "signal.csv", x)
    print(f"signal   {d / 'signal.csv'}")
    if args.reference:
        ref = formats.read_signal(args.reference)
        if not TimeAxis.of(x).matches(ref):
            raise UsageError("reference signal is not on the field's translation axis")
        err = float(np.linalg.norm(x.samples - ref.samples) / np.linalg.norm(ref.samples))
        print(f"relative L2 error {err!r}")
        if err >= ROUND_TRIP_TOL:
            raise ToleranceError(f"round-trip error {err:.4g} exceeds {ROUND_TRIP_TOL}")
    return 0


def reference_pulse(sc: Scenario) -> TimeSeries:
    if sc.pulse is None:
        raise ScenarioError("scenario has no 'pulse' section")
    g = sc.require_grid()
    t = g.t0_s + np.arange(g.n_samples) / g.fs_hz
    p = sc.pulse
    u = t - p.t_center_s
    x = np.exp(-0.5 * (u * p.bandwidth_rad_s) ** 2) * np.cos(p.center_rad_s * u)
    return TimeSeries(x, g.fs_hz, g.t0_s)


def cmd_pulse(args) -> int:
    sc = load_scenario(args.scenario)
    x = reference_pulse(sc)
    w = sc.mother()
    try:
        F = cwt(x, w, sc.require_grid().build())
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    d = _out_dir(args, sc)
    formats.write_signal(d / "pulse.csv", x)
    formats.write_field(d / "pulse_field.csv", F, w.order)
    print(f"pulse    {d / 'pulse.csv'}")
    print(f"field    {d / 'pulse_field.csv'}")
    return 0


def _snr_list(text: str | None) -> list[float | None]:
    if text is None:
        return [None]
    try:
        return [None if v.strip().lower() in ("inf", "none") else float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --snr-db list {text!r}") from exc


def cmd_modem(args) -> int:
    sc = load_scenario(args.scenario)
    cfg = sc.modem.build() if sc.modem else ModemConfig()
    ch = sc.channel.build()
    reports = [ber_run(cfg, ch, args.bits, snr, args.seed) for snr in _snr_list(args.snr_db)]
    d = _out_dir(args, sc)
    formats.write_ber(d / "ber.csv", reports)
    for r in reports:
        print(f"snr_db={r.snr_db} errors={r.n_errors}/{r.n_bits} ber={r.ber:.3e}")
    print(f"ber      {d / 'ber.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavechannel", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wavelet-info", help="admissibility constant and norms of the mother wavelet")
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_wavelet_info)

    p = sub.add_parser("sound", help="sound a scenario's channel; writes field.csv, rays.csv, heatmap.pgm")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--snr-db", type=float)
    p.add_argument("--threshold", type=float, default=0.1)
    p.set_defaults(func=cmd_sound)

    p = sub.add_parser("resolve", help="extract rays from a sounded field")
    p.add_argument("field")
    p.add_argument("--out-dir")
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--order", type=int)
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("kernel-check", help="reproducing-kernel consistency of a field")
    p.add_argument("field")
    p.add_argument("--order", type=int)
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("reconstruct", help="inverse CWT of a field; writes signal.csv")
    p.add_argument("field")
    p.add_argument("--out-dir")
    p.add_argument("--reference", help="signal CSV to compare against")
    p.add_argument("--order", type=int)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("pulse", help="write a scenario's reference pulse and its CWT")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_pulse)

    p = sub.add_parser("modem", help="Monte-Carlo BER of the scale-diversity modem; writes ber.csv")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--snr-db", help="comma-separated Eb/N0 values in dB; omit for noiseless")
    p.add_argument("--bits", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_modem)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (UsageError, ScenarioError, formats.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ToleranceError as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
