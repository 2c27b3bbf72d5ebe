"""Cycle-accurate model of the streaming filter block.

One pixel arrives per clock in raster order.  A row buffer of ``w-1``
lines turns it into a column of ``w`` pixels, which a vertical
multiplexer (row-buffer address selection) border-substitutes and shifts
into the ``w x w`` window cache.  A horizontal multiplexer on the cache
output forms the border-extended window seen by the filter function,
whose result appears ``M_L + A_L * stages`` cycles later (``C_L`` for the
transposed MAC chain).

Timing rules, with ``h = (w-1)/2`` and cycles counted from 1 at the first
accepted pixel:

* the window for output pixel ``k`` (raster index) is formed on the cycle
  that accepts input ``k + h*W + h``; the bottom border is produced by
  flushing positions past the end of the frame, overlapping the next
  frame's priming when frames run back to back;
* with neglect, only centres whose full window lies inside the image are
  emitted;
* wrap needs the far edge of the frame, so it buffers a whole frame
  (double-buffered) and forms window ``k`` at input ``k + H*W - 1``;
* direct-window-input and cached-priming hold the input stream for
  ``w-1`` and ``(w-1)/2`` cycles after every row, and for twice that at
  the frame boundary (flush plus prime).  Overlapped schemes never stall.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _engine as E
from .core import (
    ConfigError,
    CycleReport,
    FilterConfig,
    Form,
    Kernel,
    PixelImage,
    PolicyKind,
    Scheme,
    validate_config,
)
from .datapath import build_tree, compute_latency
from .golden import ImageSmallerThanWindow, ReflectOutOfRange, output_shape


class InputExhausted(RuntimeError):
    """The pipeline was stepped after every output had been emitted."""


def stall_per_boundary(scheme: Scheme, w: int) -> int:
    scheme = Scheme(scheme)
    if scheme is Scheme.DIRECT_WINDOW_INPUT:
        return w - 1
    if scheme is Scheme.CACHED_PRIMING:
        return (w - 1) // 2
    return 0


def scheme_stalls(scheme, w: int, H: int, W: int = 0) -> int:
    """Stall cycles per frame: one group per row boundary plus two at the frame edge."""
    return stall_per_boundary(scheme, w) * (H + 1)


def _border_select(n: int, w: int, kind: PolicyKind) -> np.ndarray:
    """Absolute source index for every (output position, window tap); -1 = constant."""
    h = (w - 1) // 2
    t = np.arange(n)[:, None] + np.arange(-h, h + 1)[None, :]
    lo, hi = t < 0, t >= n
    if kind is PolicyKind.CONSTANT:
        sel = np.where(lo | hi, -1, t)
    elif kind is PolicyKind.DUPLICATE:
        sel = np.clip(t, 0, n - 1)
    elif kind is PolicyKind.WRAP:
        sel = t % n
    elif kind is PolicyKind.MIRROR_DUP:
        sel = np.where(lo, -t - 1, np.where(hi, 2 * n - 1 - t, t))
    elif kind is PolicyKind.MIRROR_NODUP:
        sel = np.where(lo, -t, np.where(hi, 2 * n - 2 - t, t))
    else:
        sel = t
    bad = (sel != -1) & ((sel < 0) | (sel >= n)) if kind is not PolicyKind.NEGLECT else None
    if bad is not None and bad.any():
        raise ReflectOutOfRange(f"{kind.value} on an axis of {n} pixels with a {w}-wide window")
    return sel.astype(np.int64)


def _relative_select(n: int, w: int, kind: PolicyKind) -> np.ndarray:
    """Mux select relative to the live window (column-vector row / cache slot)."""
    if kind is PolicyKind.NEGLECT:
        return np.tile(np.arange(w, dtype=np.int64), (n, 1))
    sel = _border_select(n, w, kind)
    base = np.arange(n)[:, None] - (w - 1) // 2
    return np.where(sel >= 0, sel - base, -1).astype(np.int64)


class OutputPixel(NamedTuple):
    frame: int
    row: int
    col: int
    value: int
    cycle: int


@dataclass(eq=False)
class PipelineState:
    """Registers and memories of one filter instance.  Mutated in place by :func:`step`."""

    cfg: FilterConfig
    height: int
    width: int
    frames: int
    out_height: int
    out_width: int
    params: np.ndarray
    regs: np.ndarray
    arrays: tuple
    out_val: np.ndarray
    out_cyc: np.ndarray
    consumed: bool = False

    @property
    def cycle(self) -> int:
        return int(self.regs[E.R_CYCLE])

    @property
    def fsm(self) -> str:
        """Idle, Priming, Active or Flushing."""
        regs = self.regs
        if regs[E.R_STARTED] == 0:
            return "Idle"
        total_in = self.frames * self.height * self.width
        if regs[E.R_CONSUMED] >= total_in:
            return "Flushing"
        return "Active" if regs[E.R_FIRST_OUT] else "Priming"

    @property
    def done(self) -> bool:
        return int(self.regs[E.R_EMITTED]) == self.out_val.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.out_val.shape[0]

    def report(self) -> CycleReport:
        r = self.regs
        return CycleReport(
            first_output_cycle=int(r[E.R_FIRST_OUT]),
            total_cycles=int(r[E.R_LAST_OUT]),
            stall_cycles=int(r[E.R_STALLS]),
            output_width=self.out_width,
            output_height=self.out_height,
            pixels_consumed=int(r[E.R_CONSUMED]),
            frames=self.frames,
        )

    def images(self) -> list[PixelImage]:
        vals = self.out_val.reshape(self.frames, self.out_height, self.out_width)
        return [PixelImage(v, self.cfg.pixel_bits) for v in vals]


def _check_inputs(cfg: FilterConfig, k: Kernel, height: int, width: int):
    validate_config(cfg)
    if k.w != cfg.w:
        raise ValueError(f"kernel is {k.w}x{k.w} but the config says w={cfg.w}")
    if k.format != cfg.coeff_format:
        raise ValueError(f"kernel format {k.format} differs from config {cfg.coeff_format}")
    return output_shape(height, width, cfg.w, cfg.border_policy)


def init_state(cfg: FilterConfig, k: Kernel, height: int, width: int, frames: int = 1) -> PipelineState:
    """Reset a filter instance for ``frames`` back-to-back H x W frames."""
    out_h, out_w = _check_inputs(cfg, k, height, width)
    if frames < 1:
        raise ValueError("frames must be >= 1")
    w, h = cfg.w, cfg.half
    pol = cfg.border_policy.kind
    transposed = cfg.form is Form.TRANSPOSED
    wrap = pol is PolicyKind.WRAP and not transposed
    neglect = pol is PolicyKind.NEGLECT
    tree = build_tree(cfg.layout, w)
    hw = height * width
    delay = hw - 1 if wrap else h * width + h
    total_in = frames * hw

    params = np.zeros(E.N_PARAMS, dtype=np.int64)
    params[E.P_W] = w
    params[E.P_H] = height
    params[E.P_IW] = width
    params[E.P_FRAMES] = frames
    params[E.P_FORM] = int(transposed)
    params[E.P_WRAP] = int(wrap)
    params[E.P_NEGLECT] = int(neglect)
    params[E.P_CONST] = cfg.border_policy.constant
    params[E.P_LAT] = compute_latency(cfg, tree)
    params[E.P_DELAY] = delay
    params[E.P_STALL] = 0 if neglect else stall_per_boundary(cfg.border_scheme, w)
    params[E.P_FRAC] = cfg.coeff_format.frac_bits
    params[E.P_MAXOUT] = (1 << cfg.pixel_bits) - 1
    params[E.P_OUT_H] = out_h
    params[E.P_OUT_W] = out_w
    params[E.P_END] = total_in if neglect else total_in + delay

    if wrap:
        vsel = _border_select(height, w, pol)
        hsel = _border_select(width, w, pol)
        store = np.zeros((2, height, width), dtype=np.int64)
    else:
        vsel = _relative_select(height, w, pol)
        hsel = _relative_select(width, w, pol)
        store = np.zeros((1, 1, 1), dtype=np.int64)
    rowbuf = np.zeros((max(w - 1, 1), width), dtype=np.int64)
    cache = np.zeros((w, w), dtype=np.int64)
    raw = np.zeros(w, dtype=np.int64)
    mac = np.zeros((w * w, width + 1) if transposed else (1, 1), dtype=np.int64)
    coefs = np.ascontiguousarray(k.coeffs.reshape(-1), dtype=np.int64)
    if transposed:
        delays = np.array([0] + [1 if n % w else width - w + 1 for n in range(1, w * w)], dtype=np.int64)
    else:
        delays = np.zeros(1, dtype=np.int64)
    arity = np.array([a for st in tree.stages for a in st], dtype=np.int64)
    nodes = np.array([len(st) for st in tree.stages], dtype=np.int64)
    win = np.zeros(w * w, dtype=np.int64)
    vals = np.zeros(w * w, dtype=np.int64)
    qlen = int(params[E.P_LAT]) + 1
    queue = (np.zeros(qlen, dtype=np.int64), np.zeros(qlen, dtype=np.int64), np.zeros(qlen, dtype=np.int64))
    arrays = (rowbuf, cache, raw, vsel, hsel, store, mac, coefs, delays, arity, nodes, win, vals) + queue
    n_out = frames * out_h * out_w
    regs = np.zeros(E.N_REGS, dtype=np.int64)
    regs[E.R_OUT_IDX] = -1
    return PipelineState(
        cfg, height, width, frames, out_h, out_w, params, regs, arrays,
        np.zeros(n_out, dtype=np.int64), np.zeros(n_out, dtype=np.int64),
    )


def step(state: PipelineState, pixel: int | None = None) -> tuple[PipelineState, OutputPixel | None]:
    """Advance ``state`` by one clock, offering ``pixel`` (None = no input).

    The pixel is taken unless the pipeline is stalled, idle-waiting, or
    already flushing; ``state.consumed`` says which.  Returns the same
    (mutated) state and the output pixel emitted on this clock, if any.
    """
    if state.done:
        raise InputExhausted("all outputs already emitted")
    has = pixel is not None
    state.consumed = bool(E.cycle(state.params, state.regs, int(pixel) if has else 0, has,
                                  *state.arrays, state.out_val, state.out_cyc))
    i = int(state.regs[E.R_OUT_IDX])
    if i < 0:
        return state, None
    per_frame = state.out_height * state.out_width
    f, rem = divmod(i, per_frame)
    r, c = divmod(rem, state.out_width)
    return state, OutputPixel(f, r, c, int(state.regs[E.R_OUT_VAL]), state.cycle)


def simulate_frames(cfg: FilterConfig, frames: Sequence[PixelImage], k: Kernel) -> tuple[list[PixelImage], CycleReport]:
    """Stream ``frames`` back to back with no gap and collect every output."""
    if not frames:
        raise ValueError("need at least one frame")
    H, W = frames[0].height, frames[0].width
    for f in frames:
        if (f.height, f.width) != (H, W):
            raise ValueError("all frames must share one size")
        if f.samples.max() >= (1 << cfg.pixel_bits):
            raise ValueError(f"pixel exceeds {cfg.pixel_bits}-bit range")
    state = init_state(cfg, k, H, W, len(frames))
    stream = np.concatenate([f.raster for f in frames]).astype(np.int64)
    E.run(state.params, state.regs, stream, state.n_outputs, *state.arrays, state.out_val, state.out_cyc)
    return state.images(), state.report()


def simulate(cfg: FilterConfig, img: PixelImage, k: Kernel) -> tuple[PixelImage, CycleReport]:
    """Filter one frame; returns the output image and its timing report."""
    (out,), report = simulate_frames(cfg, [img], k)
    return out, report


__all__ = [
    "ConfigError", "ImageSmallerThanWindow", "InputExhausted", "OutputPixel", "PipelineState",
    "init_state", "scheme_stalls", "simulate", "simulate_frames", "stall_per_boundary", "step",
]
