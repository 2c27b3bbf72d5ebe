"""Command-line front end: ``filtersim {simulate,estimate,sweep,golden}``.

Exit status: 0 success, 1 configuration error, 2 I/O error, 3 simulator
output differs from the golden oracle (``simulate --verify``).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import BorderPolicy, ConfigError, FilterConfig, Form, Layout, PixelImage, PolicyKind, Scheme
from .estimator import (
    Border,
    SweepRow,
    config_resources,
    dsp_usage,
    latency_formula,
    reference_points,
    sweep,
    sweep_points,
    throughput_fps,
)
from .fileio import KernelFileError, PgmError, load_kernel, load_pgm, write_pgm
from .golden import ImageSmallerThanWindow, ReflectOutOfRange, golden_convolve
from .pipeline import simulate
from .report import ReportRecord, rows_to_csv, rows_to_json

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3

CONFIG_ERRORS = (ConfigError, ReflectOutOfRange, ImageSmallerThanWindow)
IO_ERRORS = (OSError, PgmError, KernelFileError)


class RangeError(ValueError):
    pass


def parse_range(text: str, step: int = 1) -> list[int]:
    """``"3..7"``, ``"3,5,9"`` or ``"20..100:40"``; ``step`` is the default stride."""
    out = []
    for item in text.split(","):
        item = item.strip()
        try:
            if ".." in item:
                span, _, stride = item.partition(":")
                lo, hi = (int(v) for v in span.split("..", 1))
                s = int(stride) if stride else step
                if s < 1 or hi < lo:
                    raise RangeError(f"empty or backwards range {item!r}")
                out.extend(range(lo, hi + 1, s))
            else:
                out.append(int(item))
        except ValueError as exc:
            if isinstance(exc, RangeError):
                raise
            raise RangeError(f"bad range item {item!r}") from None
    return out


def _enum_list(enum_cls, text: str):
    try:
        return [enum_cls(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError:
        raise RangeError(f"expected some of {[e.value for e in enum_cls]}, got {text!r}") from None


def _add_arch_flags(p: argparse.ArgumentParser):
    p.add_argument("--form", choices=[f.value for f in Form], default="direct")
    p.add_argument("--layout", choices=[x.value for x in Layout], default="log")
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="overlapped-pf")
    p.add_argument("--no-simd", dest="simd", action="store_false", help="disable dual 24-bit SIMD adders")
    p.add_argument("--mult-latency", type=int, default=3)
    p.add_argument("--mac-latency", type=int, default=3)


def _add_policy_flags(p: argparse.ArgumentParser, default="mirror-nodup"):
    p.add_argument("--policy", choices=[k.value for k in PolicyKind], default=default)
    p.add_argument("--constant", type=int, default=0, help="fill value for --policy constant")


def _random_image(text: str, seed: int) -> PixelImage:
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise RangeError(f"--random expects HxW, got {text!r}") from None
    rng = np.random.default_rng(seed)
    return PixelImage(rng.integers(0, 256, size=(h, w)))


def _write_text(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def cmd_simulate(args) -> int:
    try:
        k = load_kernel(args.kernel)
        img = load_pgm(args.image) if args.image else _random_image(args.random, args.seed)
    except IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = FilterConfig(
        form=args.form, layout=args.layout,
        border_policy=BorderPolicy(args.policy, args.constant),
        border_scheme=args.scheme, w=k.w, pixel_bits=8, coeff_format=k.format,
        mult_latency=args.mult_latency, mac_latency=args.mac_latency, simd_packing=args.simd,
    )
    try:
        out, cycles = simulate(cfg, img, k)
    except CONFIG_ERRORS + (ValueError,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    verified = None
    if args.verify:
        ref = golden_convolve(img, k, cfg.border_policy, cfg.pixel_bits)
        verified = ref == out
        if not verified:
            bad = int(np.count_nonzero(ref.samples != out.samples)) if ref.samples.shape == out.samples.shape else -1
            print(f"verify: simulator and oracle differ ({bad} pixels)", file=sys.stderr)

    res = config_resources(cfg, k)
    fps = None
    if args.fclk is not None:
        fps = throughput_fps(args.fclk * 1e6, img.height, img.width, cfg.border_scheme, cfg.w)
    record = ReportRecord.build(cfg, cycles, res, img.width, img.height, args.fclk, fps, verified)

    try:
        if args.out:
            write_pgm(args.out, out)
        _write_text(args.report, record.to_json())
    except IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_MISMATCH if verified is False else EXIT_OK


def cmd_golden(args) -> int:
    try:
        k = load_kernel(args.kernel)
        img = load_pgm(args.image)
    except IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        out = golden_convolve(img, k, BorderPolicy(args.policy, args.constant))
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        write_pgm(args.out, out)
    except IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _emit_rows(rows: list[SweepRow], fmt: str, out):
    dicts = [r.as_dict() for r in rows]
    text = rows_to_json(dicts) if fmt == "json" else rows_to_csv(dicts, SweepRow.FIELDS)
    _write_text(out, text)


def cmd_estimate(args) -> int:
    try:
        res = dsp_usage(args.form, args.layout, args.w, simd=args.simd)
        lat = latency_formula(args.form, args.layout, args.w, args.iw, args.border,
                              mult_latency=args.mult_latency, mac_latency=args.mac_latency,
                              scheme=args.scheme)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    data = {
        "form": args.form, "layout": args.layout, "w": args.w, "iw": args.iw,
        "border": args.border, "scheme": args.scheme, "simd": args.simd,
        "mult_dsp": res.mult_dsp, "adder_dsp": res.adder_dsp, "total_dsp": res.total_dsp,
        "adder_count": res.adder_count, "stage_count": res.stage_count,
        "simd_applied": res.simd_applied, "latency": lat, "f_clk_mhz": args.fclk, "fps": None,
    }
    if args.fclk is not None:
        data["fps"] = throughput_fps(args.fclk * 1e6, args.height, args.iw, args.scheme, args.w)
    if args.format == "csv":
        _write_text(args.report, rows_to_csv([data], list(data)))
    else:
        _write_text(args.report, json.dumps(data, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.paper_tables:
        rows = sweep_points(reference_points())
    else:
        try:
            ws = parse_range(args.w, step=2)
            iws = parse_range(args.iw)
            layouts = _enum_list(Layout, args.layout)
            forms = _enum_list(Form, args.form)
            schemes = _enum_list(Scheme, args.scheme)
            borders = _enum_list(Border, args.border)
        except RangeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        rows = sweep(ws, layouts, forms, schemes, iws, borders, height=args.height,
                     f_clk_mhz=args.fclk, simd=args.simd, run_sim=args.simulate,
                     workers=args.workers)
    _emit_rows(rows, args.format, args.report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="filtersim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="cycle-accurate run on one image")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="input PGM (P5)")
    src.add_argument("--random", metavar="HxW", help="use a random 8-bit image instead")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kernel", required=True, help="coefficient file")
    _add_arch_flags(p)
    _add_policy_flags(p)
    p.add_argument("--out", help="write the filtered image here")
    p.add_argument("--report", help="write the JSON report here (default: stdout)")
    p.add_argument("--verify", action="store_true", help="compare against the golden oracle")
    p.add_argument("--fclk", type=float, help="clock in MHz, for the fps figure")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="closed-form DSP count, latency and fps")
    _add_arch_flags(p)
    p.add_argument("-w", type=int, default=7)
    p.add_argument("--iw", type=int, default=640, help="image width")
    p.add_argument("--height", type=int, default=480, help="image height (fps only)")
    p.add_argument("--border", choices=[b.value for b in Border], default="handled")
    p.add_argument("--fclk", type=float, help="clock in MHz")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--report", help="output path (default: stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="estimate over a grid of configurations")
    p.add_argument("-w", default="7", help="window sizes, e.g. 3..7 or 3,5")
    p.add_argument("--iw", default="640", help="image widths, e.g. 20,100,640")
    p.add_argument("--layout", default="dsp,log,dspcomp")
    p.add_argument("--form", default="direct")
    p.add_argument("--scheme", default="overlapped-pf")
    p.add_argument("--border", default="handled")
    p.add_argument("--height", type=int, help="image height for the fps column")
    p.add_argument("--fclk", type=float, help="clock in MHz (default: measured reference, if any)")
    p.add_argument("--no-simd", dest="simd", action="store_false")
    p.add_argument("--simulate", action="store_true", help="also measure latency with the simulator")
    p.add_argument("--workers", type=int, help="parallel simulations (default: FILTERSIM_THREADS)")
    p.add_argument("--paper-tables", action="store_true", help="the published w=7 configurations")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--report", help="output path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("golden", help="reference convolution, no timing")
    p.add_argument("--image", required=True)
    p.add_argument("--kernel", required=True)
    _add_policy_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_golden)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
