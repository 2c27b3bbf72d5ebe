"""Closed-form DSP, latency and throughput estimates, plus the sweep driver.

These are the fast counterparts of :mod:`filtersim.pipeline`; the test
suite checks that both agree cycle for cycle.
"""

from __future__ import annotations

import enum
import itertools
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    ADDER_LATENCY,
    BorderPolicy,
    FilterConfig,
    Form,
    Kernel,
    Layout,
    PixelImage,
    PolicyKind,
    ResourceReport,
    Scheme,
)
from .datapath import SimdIllegal, build_tree
from .pipeline import scheme_stalls, simulate, stall_per_boundary


class Border(str, enum.Enum):
    HANDLED = "handled"
    NEGLECT = "neglect"


class TransposedWithBorder(ValueError):
    pass


# Post place-and-route clock frequencies measured on a Virtex-6 XC6VLX240T,
# keyed by (form, layout, border).  These are inputs for throughput figures,
# never predictions.
REFERENCE_FMAX_MHZ = {
    ("direct", "dsp", "neglect"): 462.0,
    ("direct", "log", "neglect"): 422.0,
    ("direct", "dspcomp", "neglect"): 426.0,
    ("transposed", "log", "neglect"): 400.0,
    ("direct", "dsp", "handled"): 405.0,
    ("direct", "log", "handled"): 403.0,
    ("direct", "dspcomp", "handled"): 401.0,
}
# Zynq 1920x1080 runs: hand-written LOG design versus a fixed-coefficient HLS filter.
ZYNQ_FMAX_MHZ = {"log": 369.0, "hls": 214.0}


def reference_fmax(form, layout, border) -> float | None:
    form, layout, border = Form(form), Layout(layout), Border(border)
    if form is Form.TRANSPOSED:
        layout = Layout.LOG  # no adder tree; one measurement covers it
    return REFERENCE_FMAX_MHZ.get((form.value, layout.value, border.value))


def dsp_usage(form, layout, w: int, simd: bool = True, operand_width: int = 24) -> ResourceReport:
    """DSP blocks for a w x w filter: one multiplier per tap plus the adder tree."""
    form, layout = Form(form), Layout(layout)
    if w < 1 or w % 2 == 0:
        raise ValueError(f"window size must be odd, got {w}")
    n = w * w
    if form is Form.TRANSPOSED:
        # Each MAC block absorbs its add; there is no separate tree.
        return ResourceReport(mult_dsp=n, adder_dsp=0, adder_count=0, stage_count=0)
    tree = build_tree(layout, w, simd_packing=simd and layout is Layout.DSP, operand_width=operand_width)
    return ResourceReport(
        mult_dsp=n,
        adder_dsp=tree.dsp_cost,
        adder_count=tree.adder_count,
        stage_count=tree.stage_count,
        simd_applied=tree.simd_applied,
    )


def config_resources(cfg: FilterConfig, k: Kernel | None = None) -> ResourceReport:
    """DSP usage of a concrete configuration.

    With a kernel, SIMD legality uses the real worst-case product
    magnitude instead of the operand width alone.
    """
    if cfg.form is Form.TRANSPOSED:
        return dsp_usage(cfg.form, cfg.layout, cfg.w)
    max_op = None if k is None else ((1 << cfg.pixel_bits) - 1) * k.max_magnitude
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SimdIllegal)
        tree = build_tree(cfg.layout, cfg.w, cfg.simd_packing and cfg.layout is Layout.DSP,
                          cfg.product_width, max_op)
    return ResourceReport(cfg.w * cfg.w, tree.dsp_cost, tree.adder_count, tree.stage_count,
                          tree.simd_applied)


def latency_formula(form, layout, w: int, iw: int, border, *, mult_latency: int = 3,
                    mac_latency: int = 3, scheme=Scheme.OVERLAPPED_PF) -> int:
    """Cycles from the first accepted pixel to the first output pixel.

    With border handling the first window completes once ``(w-1)/2`` rows
    and ``(w+1)/2`` pixels are in; with neglect it needs ``w-1`` rows and
    ``w`` pixels.  A stalling scheme adds its per-row stall for each of
    the ``(w-1)/2`` row boundaries crossed before that.
    """
    form, layout, border = Form(form), Layout(layout), Border(border)
    if w < 1 or w % 2 == 0:
        raise ValueError(f"window size must be odd, got {w}")
    if iw < w:
        raise ValueError("image width must be at least the window size")
    h = (w - 1) // 2
    if form is Form.TRANSPOSED:
        if border is Border.HANDLED:
            raise TransposedWithBorder("transposed form cannot handle borders")
        comp = mac_latency
    else:
        comp = mult_latency + ADDER_LATENCY[layout] * build_tree(layout, w).stage_count
    if border is Border.NEGLECT:
        return (w - 1) * iw + w + comp
    return h * iw + (w + 1) // 2 + comp + h * stall_per_boundary(scheme, w)


def throughput_fps(f_clk_hz: float, height: int, width: int, scheme=Scheme.OVERLAPPED_PF, w: int = 7) -> float:
    """Steady-state frame rate at one pixel per unstalled clock."""
    if f_clk_hz <= 0:
        raise ValueError("clock frequency must be positive")
    return f_clk_hz / (height * width + scheme_stalls(scheme, w, height, width))


@dataclass(frozen=True)
class SweepPoint:
    form: str
    layout: str
    w: int
    iw: int
    border: str
    scheme: str = Scheme.OVERLAPPED_PF.value
    height: int | None = None
    f_clk_mhz: float | None = None
    simd: bool = True


@dataclass
class SweepRow:
    form: str
    layout: str
    w: int
    iw: int
    border: str
    scheme: str
    simd: bool
    mult_dsp: int | None = None
    adder_dsp: int | None = None
    total_dsp: int | None = None
    adder_count: int | None = None
    stage_count: int | None = None
    simd_applied: bool | None = None
    latency: int | None = None
    simulated_latency: int | None = None
    height: int | None = None
    f_clk_mhz: float | None = None
    fps: float | None = None
    error: str = ""

    FIELDS = ("form", "layout", "w", "iw", "border", "scheme", "simd", "mult_dsp", "adder_dsp",
              "total_dsp", "adder_count", "stage_count", "simd_applied", "latency",
              "simulated_latency", "height", "f_clk_mhz", "fps", "error")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


def _simulated_latency(pt: SweepPoint) -> int:
    policy = BorderPolicy(PolicyKind.NEGLECT if pt.border == "neglect" else PolicyKind.MIRROR_NODUP)
    cfg = FilterConfig(form=pt.form, layout=pt.layout, border_policy=policy,
                       border_scheme=pt.scheme, w=pt.w)
    # Only timing matters; a frame w rows tall reaches the first output.
    img = PixelImage(np.zeros((max(pt.w, 1), pt.iw), dtype=np.int64))
    _, rep = simulate(cfg, img, Kernel.identity(pt.w))
    return rep.first_output_cycle


def evaluate_point(pt: SweepPoint, run_sim: bool = False) -> SweepRow:
    row = SweepRow(pt.form, pt.layout, pt.w, pt.iw, pt.border, pt.scheme, pt.simd,
                   height=pt.height, f_clk_mhz=pt.f_clk_mhz)
    try:
        res = dsp_usage(pt.form, pt.layout, pt.w, simd=pt.simd)
        row.mult_dsp, row.adder_dsp, row.total_dsp = res.mult_dsp, res.adder_dsp, res.total_dsp
        row.adder_count, row.stage_count, row.simd_applied = res.adder_count, res.stage_count, res.simd_applied
        row.latency = latency_formula(pt.form, pt.layout, pt.w, pt.iw, pt.border, scheme=pt.scheme)
        if run_sim:
            row.simulated_latency = _simulated_latency(pt)
        fclk = pt.f_clk_mhz if pt.f_clk_mhz is not None else reference_fmax(pt.form, pt.layout, pt.border)
        if fclk is not None and pt.height is not None:
            row.f_clk_mhz = fclk
            row.fps = round(throughput_fps(fclk * 1e6, pt.height, pt.iw, pt.scheme, pt.w), 3)
    except ValueError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _point_key(pt: SweepPoint):
    return (pt.form, pt.layout, pt.w, pt.iw, pt.border, pt.scheme,
            pt.height or 0, pt.f_clk_mhz or 0.0, pt.simd)


def sweep_points(points, run_sim: bool = False, workers: int | None = None) -> list[SweepRow]:
    """Evaluate ``points``; rows come back sorted by configuration key."""
    points = sorted(set(points), key=_point_key)
    if workers is None:
        workers = int(os.environ.get("FILTERSIM_THREADS", "0") or 0) or (os.cpu_count() or 1)
    if not run_sim or workers <= 1 or len(points) < 2:
        return [evaluate_point(p, run_sim) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: evaluate_point(p, True), points))


def sweep(ws=(7,), layouts=tuple(Layout), forms=(Form.DIRECT,), schemes=(Scheme.OVERLAPPED_PF,),
          iws=(640,), borders=(Border.HANDLED,), height: int | None = None,
          f_clk_mhz: float | None = None, simd: bool = True, run_sim: bool = False,
          workers: int | None = None) -> list[SweepRow]:
    """Cross product of the given ranges.  Transposed points ignore ``layouts``."""
    points = []
    for w, form, layout, scheme, iw, border in itertools.product(ws, forms, layouts, schemes, iws, borders):
        form = Form(form)
        layout = Layout.LOG if form is Form.TRANSPOSED else Layout(layout)
        points.append(SweepPoint(form.value, layout.value, int(w), int(iw), Border(border).value,
                                 Scheme(scheme).value, height, f_clk_mhz, simd))
    return sweep_points(points, run_sim=run_sim, workers=workers)


def reference_points() -> list[SweepPoint]:
    """The published configurations: w=7 at 100x100 and 640x480."""
    pts = []
    for layout in Layout:
        pts.append(SweepPoint("direct", layout.value, 7, 100, "handled", height=100))
        pts.append(SweepPoint("direct", layout.value, 7, 640, "neglect", height=480))
        pts.append(SweepPoint("direct", layout.value, 7, 640, "handled", height=480))
    pts.append(SweepPoint("transposed", "log", 7, 100, "neglect", height=100))
    pts.append(SweepPoint("transposed", "log", 7, 640, "neglect", height=480))
    return pts


@dataclass(frozen=True)
class SchemeOverhead:
    """Extra pixel-cache hardware a border scheme needs, in pixel registers."""

    scheme: str
    stall_per_boundary: int
    substitution_muxes: int
    temp_cache_registers: int
    temp_row_buffer_pixels: int
    address_generation: bool

    @property
    def extra_storage(self) -> int:
        return self.temp_cache_registers + self.temp_row_buffer_pixels


def scheme_overhead(scheme, w: int, iw: int) -> SchemeOverhead:
    """Qualitative hardware cost of each border scheme.

    Counts follow the structure: overlapped schemes add one substitution
    mux per window tap and ``(w-1)/2`` temporary columns in the cache; the
    naive variant also keeps ``(w-1)/2`` temporary rows.  ``None`` as the
    scheme gives the no-border baseline.
    """
    h = (w - 1) // 2
    if scheme is None:
        return SchemeOverhead("none", 0, 0, 0, 0, False)
    scheme = Scheme(scheme)
    if scheme is Scheme.DIRECT_WINDOW_INPUT:
        return SchemeOverhead(scheme.value, w - 1, 0, 0, 0, True)
    if scheme is Scheme.CACHED_PRIMING:
        return SchemeOverhead(scheme.value, h, w * w, 0, 0, False)
    temp_rows = h * iw if scheme is Scheme.NAIVE_OVERLAPPED else 0
    return SchemeOverhead(scheme.value, 0, w * w, h * w, temp_rows, False)


__all__ = [
    "Border", "REFERENCE_FMAX_MHZ", "config_resources", "SweepPoint", "SweepRow", "TransposedWithBorder", "ZYNQ_FMAX_MHZ",
    "dsp_usage", "evaluate_point", "latency_formula", "reference_fmax", "reference_points",
    "scheme_overhead", "sweep", "sweep_points", "throughput_fps",
]
