"""Command-line front end.

Exit codes: 0 success, 1 validation failure or violation, 2 infeasible
geometry, 3 I/O, schema or usage error. Data goes to stdout (or ``--out``),
diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from datetime import date, time
from pathlib import Path

from . import shadow_geometry as sg
from . import solar_ephemeris as se
from . import slope_error as sl
from .errors import DomainError, InfeasibleGeometryError, SchemaError, ShadowHeightError
from .scene_model import (
    REPORT_FORMATS,
    SceneValidationError,
    dumps_scene,
    format_report,
    gate_for_scene,
    process_scene,
    read_scene_file,
)
from .synth_oracle import NoiseModel, generate_scene, round_trip

EXIT_OK, EXIT_VIOLATION, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3

# Dates (month, day) of the declination grid; the year is supplied by the caller.
DECLINATION_GRID_DATES = ((1, 15), (3, 15), (5, 15), (7, 15), (9, 15), (11, 15))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_sun(args) -> int:
    if args.declination is not None:
        delta = args.declination
    elif args.date is not None:
        clock = time.fromisoformat(args.time)
        instant = se.CivilInstant.from_local(
            args.date, clock.hour + clock.minute / 60 + clock.second / 3600, args.utc_offset
        )
        delta = se.declination_at(instant)
    else:
        raise DomainError("give --date (with --time) or --declination")
    lines = [f"declination_deg: {delta:.4f}"]
    if args.lat is None:
        if args.solar_azimuth is not None or args.hour_angle is not None:
            raise DomainError("--lat is required to resolve the hour angle and elevation")
        _emit("\n".join(lines) + "\n", None)
        return EXIT_OK
    if args.hour_angle is not None:
        omega = args.hour_angle
    elif args.solar_azimuth is not None:
        if args.half_day is None:
            raise DomainError("--half-day is required with --solar-azimuth")
        omega = se.hour_angle(args.solar_azimuth, args.lat, delta, args.half_day)
    else:
        raise DomainError("give exactly one of --solar-azimuth or --hour-angle")
    state = se.solar_state(args.lat, delta, omega)
    lines.append(f"hour_angle_deg: {state.hour_angle_deg:.4f}")
    lines.append(f"elevation_deg: {state.elevation_deg:.4f}")
    if state.azimuth_deg is not None:
        lines.append(f"azimuth_deg: {state.azimuth_deg:.4f}")
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_estimate(args) -> int:
    obs, neighbors = read_scene_file(args.scene, strict=not args.lenient)
    gate = gate_for_scene(obs, args.gate_error)
    try:
        report = process_scene(obs, neighbors, gate, force=args.force)
    except SceneValidationError as exc:
        for v in exc.outcome.violations:
            print(f"violation {v.code}: {v.message}", file=sys.stderr)
        return EXIT_VIOLATION
    _emit(format_report(report, args.format), args.out)
    if args.out or args.format != "text":
        for d in report.diagnostics:
            print(f"[{d.code}] {d.subject}: {d.message}", file=sys.stderr)
    if not any(r.estimate for r in report.structures):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_propagate(args) -> int:
    if args.shadow and args.ratio_cs is None:
        raise DomainError("--shadow needs --ratio-cs")
    if args.edge and args.ratio_hs is None:
        raise DomainError("--edge needs --ratio-hs")
    rows = [("neighbor", "method", "H_m")]
    for i, length in enumerate(args.shadow or [], 1):
        rows.append((f"shadow-{i}", "shadow", repr(sg.propagate_by_shadow(args.ratio_cs, length))))
    for i, length in enumerate(args.edge or [], 1):
        rows.append((f"edge-{i}", "edge", repr(sg.propagate_by_edge(args.ratio_hs, length))))
    _emit(_csv(rows), args.out)
    return EXIT_OK


def cmd_slope_gate(args) -> int:
    signs = [sl.SlopeSign.POSITIVE, sl.SlopeSign.NEGATIVE] if args.sign == "both" else [sl.SlopeSign(args.sign)]
    rows = [("sign", "target_rel_error", "solar_elevation_deg", "max_slope_deg")]
    limits = {}
    for s in signs:
        limits[s] = sl.max_admissible_slope(args.target, args.elevation, s)
        rows.append((s.value, repr(args.target), repr(args.elevation), repr(limits[s])))
    _emit(_csv(rows), args.out)
    if args.slope is not None:
        check = sl.SlopeSign.POSITIVE if args.sign == "both" else sl.SlopeSign(args.sign)
        if args.slope > limits[check]:
            print(f"{check.value} slope {args.slope} deg exceeds {limits[check]:.4f} deg", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK


def table_rows(which: int, year: int | None = None, utc_offset: float = 2.0) -> list[tuple]:
    """Rows of a regenerated reference table, header first."""
    if which in (1, 2):
        sign = sl.SlopeSign.POSITIVE if which == 1 else sl.SlopeSign.NEGATIVE
        slopes = sl.POSITIVE_GRID_SLOPES if which == 1 else sl.NEGATIVE_GRID_SLOPES
        grid = sl.error_table(slopes, sl.GRID_ELEVATIONS, sign)
        rows = [("slope_deg",) + tuple(f"h{h:g}" for h in sl.GRID_ELEVATIONS)]
        for theta, row in zip(slopes, grid):
            rows.append((f"{theta:g}",) + tuple(str(sl.round_half_up(v)) for v in row))
        return rows
    if which == 3:
        if year is None:
            raise DomainError("the declination grid (--which 3) needs --year")
        rows = [("date", "delta_09", "delta_12", "delta_15", "max_d_delta", "max_d_sin", "max_d_cos")]
        for month, day in DECLINATION_GRID_DATES:
            sp = se.declination_daily_spread(date(year, month, day), utc_offset)
            rows.append((f"{year}-{month:02d}-{day:02d}",) + tuple(f"{d:.4f}" for d in sp.samples_deg)
                        + (f"{sp.max_abs_delta_deg:.4f}", f"{sp.max_abs_delta_sin:.2e}",
                           f"{sp.max_abs_delta_cos:.2e}"))
        return rows
    raise DomainError(f"unknown table {which}")


def cmd_tables(args) -> int:
    _emit(_csv(table_rows(args.which, args.year, args.utc_offset)), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    noise = NoiseModel(args.length_sigma, args.angle_sigma)
    scene = generate_scene(args.seed, args.structures, args.neighbors, noise=noise)
    obs, neighbors = scene.to_observation()
    _emit(dumps_scene(obs, neighbors), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    summary = round_trip(range(args.first_seed, args.first_seed + args.seeds), args.structures)
    ok = summary.passed(args.tolerance)
    print(f"scenes: {summary.scenes}")
    print(f"structures: {summary.structures}")
    print(f"rejected_by_generator: {summary.rejections}")
    print(f"worst_height_rel_error: {summary.worst_height_rel_error:.3e}")
    print(f"worst_ratio_std: {summary.worst_ratio_std:.3e}")
    for f in summary.failures:
        print(f"failure: {f}", file=sys.stderr)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shadowheight", description="Structure height from satellite-image shadow measurements.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sun", help="declination, hour angle, elevation and azimuth")
    s.add_argument("--date", type=date.fromisoformat, help="acquisition date YYYY-MM-DD")
    s.add_argument("--time", default="12:00", help="local clock time HH:MM[:SS] (default 12:00)")
    s.add_argument("--utc-offset", type=float, default=0.0, help="hours east of UTC of the clock (default 0)")
    s.add_argument("--declination", type=float, help="declination in degrees, bypasses --date")
    s.add_argument("--lat", type=float, help="latitude in degrees")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--solar-azimuth", type=float, help="measured solar azimuth, degrees clockwise from north")
    g.add_argument("--hour-angle", type=float, help="hour angle in degrees (positive morning)")
    s.add_argument("--half-day", choices=[h.value for h in se.HalfDay], help="needed with --solar-azimuth")
    s.set_defaults(func=cmd_sun)

    e = sub.add_parser("estimate", help="process a scene file into a height report")
    e.add_argument("--scene", required=True, help="scene file (YAML)")
    e.add_argument("--gate-error", type=float, default=0.05, help="target relative height error (default 0.05)")
    e.add_argument("--format", choices=sorted(REPORT_FORMATS), default="text", help="report format")
    e.add_argument("--out", help="write the report here instead of stdout")
    e.add_argument("--force", action="store_true", help="process despite validation violations")
    e.add_argument("--lenient", action="store_true", help="warn on unknown scene fields instead of failing")
    e.set_defaults(func=cmd_estimate)

    pr = sub.add_parser("propagate", help="neighbour heights from a scene ratio")
    pr.add_argument("--ratio-cs", type=float, help="height / shadow-segment ratio")
    pr.add_argument("--shadow", type=float, nargs="+", help="neighbour shadow segments (m)")
    pr.add_argument("--ratio-hs", type=float, help="height / edge-displacement ratio")
    pr.add_argument("--edge", type=float, nargs="+", help="neighbour edge displacements (m)")
    pr.add_argument("--out", help="write CSV here instead of stdout")
    pr.set_defaults(func=cmd_propagate)

    sg_ = sub.add_parser("slope-gate", help="largest admissible terrain slope for a target error")
    sg_.add_argument("--target", type=float, default=0.05, help="target relative error (default 0.05)")
    sg_.add_argument("--elevation", type=float, required=True, help="solar elevation in degrees")
    sg_.add_argument("--sign", choices=["positive", "negative", "both"], default="both", help="slope sign")
    sg_.add_argument("--slope", type=float, help="slope to check; exit 1 when it exceeds the gate")
    sg_.add_argument("--out", help="write CSV here instead of stdout")
    sg_.set_defaults(func=cmd_slope_gate)

    t = sub.add_parser("tables", help="reference grids: 1 positive-slope error, 2 negative-slope error, 3 declination")
    t.add_argument("--which", type=int, choices=[1, 2, 3], required=True, help="1 positive-slope error, 2 negative-slope error, 3 daily declination")
    t.add_argument("--year", type=int, help="year of the declination grid (--which 3)")
    t.add_argument("--utc-offset", type=float, default=2.0,
                   help="UTC offset of the declination grid clock times (default 2)")
    t.add_argument("--out", help="write CSV here instead of stdout")
    t.set_defaults(func=cmd_tables)

    sy = sub.add_parser("synth", help="write a seeded synthetic scene file with embedded ground truth")
    sy.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sy.add_argument("--structures", type=_positive_int, default=5, help="measured structures (default 5)")
    sy.add_argument("--neighbors", type=int, default=0, help="neighbours to propagate to (default 0)")
    sy.add_argument("--length-sigma", type=float, default=0.0, help="length noise sigma in m (default 0)")
    sy.add_argument("--angle-sigma", type=float, default=0.0, help="azimuth noise sigma in deg (default 0)")
    sy.add_argument("--out", help="write the scene here instead of stdout")
    sy.set_defaults(func=cmd_synth)

    v = sub.add_parser("verify", help="round-trip the forward model through the estimator")
    v.add_argument("--seeds", type=_positive_int, default=1000, help="number of synthetic scenes (default 1000)")
    v.add_argument("--first-seed", type=int, default=0, help="first seed (default 0)")
    v.add_argument("--structures", type=_positive_int, default=5, help="structures per scene (default 5)")
    v.add_argument("--tolerance", type=float, default=1e-9, help="max relative height error (default 1e-9)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InfeasibleGeometryError as exc:
        print(f"infeasible geometry: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ShadowHeightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
