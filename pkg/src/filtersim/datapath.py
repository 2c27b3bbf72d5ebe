"""Filter-function arithmetic: multiplier bank, adder trees and the MAC chain.

Adder-tree layouts differ in timing and DSP cost, never in value: every
layout returns the exact integer sum of its inputs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import QUAD_LANE_BITS, SIMD_LANE_BITS, FilterConfig, Form, Layout


class SimdIllegal(UserWarning):
    """SIMD packing was requested but would overflow a 24-bit lane."""


def simd_lanes(operand_width: int, max_operand: int | None = None) -> int:
    """Widest legal SIMD split of a DSP post-adder for one first-stage add.

    Returns 4 (quad 12-bit), 2 (dual 24-bit) or 1 (no packing).  With a
    known operand magnitude bound the pairwise sum must fit a signed lane;
    without one the operand width alone decides.
    """
    for lanes, bits in ((4, QUAD_LANE_BITS), (2, SIMD_LANE_BITS)):
        if operand_width > bits:
            continue
        if max_operand is None or 2 * max_operand <= (1 << (bits - 1)) - 1:
            return lanes
    return 1


def simd_legal(operand_width: int, max_operand: int | None = None) -> bool:
    return simd_lanes(operand_width, max_operand) >= 2


@dataclass(frozen=True)
class TreeShape:
    """Stage-by-stage adder tree over ``n_inputs`` products.

    ``stages[s]`` lists the arity of every node in stage ``s``; an arity
    of 1 is a pass-through wire, anything larger is an adder.
    """

    layout: Layout
    n_inputs: int
    stages: tuple[tuple[int, ...], ...]
    dsp_cost: int
    simd_applied: bool = False

    @property
    def stage_count(self) -> int:
        return len(self.stages)

    @property
    def adders(self) -> list[list[int]]:
        return [[a for a in st if a > 1] for st in self.stages]

    @property
    def adder_count(self) -> int:
        return sum(len(a) for a in self.adders)

    def reduction(self) -> int:
        """Total inputs consumed minus outputs produced; always n_inputs - 1."""
        return sum(sum(st) - len(st) for st in self.stages)


def _reduce_stage(n: int, layout: Layout) -> tuple[int, ...]:
    if layout is Layout.DSPCOMP:
        full, rest = divmod(n, 6)
        if full == 0:
            return (n,)
        return (6,) * full + (1,) * rest
    pairs, rest = divmod(n, 2)
    return (2,) * pairs + (1,) * rest


def closed_form_adders(layout: Layout, w: int) -> int:
    n = w * w
    if layout is Layout.DSPCOMP:
        return -(-(n - 1) // 5)
    return n - 1


def build_tree(layout, w: int, simd_packing: bool = False, operand_width: int = 24,
               max_operand: int | None = None) -> TreeShape:
    """Greedy stage-by-stage reduction of ``w*w`` products.

    Pairwise layouts (DSP, LOG) add neighbours and pass an odd leftover
    through.  DSPCOMP forms as many 6-input adders as fit, or one adder
    over everything once fewer than six operands remain.
    """
    layout = Layout(layout)
    if w < 1 or w % 2 == 0:
        raise ValueError(f"window size must be odd, got {w}")
    n = w * w
    stages = []
    while n > 1:
        st = _reduce_stage(n, layout)
        stages.append(st)
        n = len(st)
    stages = tuple(stages)
    adders = [sum(1 for a in st if a > 1) for st in stages]

    simd = False
    if layout is Layout.LOG:
        cost = 0
    elif layout is Layout.DSPCOMP:
        cost = 2 * sum(adders)
    else:
        cost = sum(adders)
        if simd_packing and stages:
            if simd_legal(operand_width, max_operand):
                simd = True
                cost = -(-adders[0] // 2) + sum(adders[1:])
            else:
                warnings.warn(
                    f"dual 24-bit SIMD illegal for {operand_width}-bit operands"
                    + (f" of magnitude {max_operand}" if max_operand is not None else ""),
                    SimdIllegal, stacklevel=2)
    return TreeShape(layout, w * w, stages, cost, simd)


def eval_direct(tree: TreeShape, products) -> int:
    """Push ``products`` through the tree stage by stage; returns the root."""
    vals = [int(p) for p in products]
    if len(vals) != tree.n_inputs:
        raise ValueError(f"expected {tree.n_inputs} products, got {len(vals)}")
    for st in tree.stages:
        nxt, i = [], 0
        for arity in st:
            nxt.append(sum(vals[i:i + arity]))
            i += arity
        vals = nxt
    return vals[0]


@dataclass(frozen=True)
class MacChain:
    """Transposed-form chain of ``w*w`` multiply-accumulate stages.

    Stage ``n`` (row-major over the kernel) adds its product to the
    partial sum of stage ``n-1`` delayed by ``delays[n]`` pixels: one
    pixel within a kernel row, ``iw - w + 1`` across a row boundary.
    """

    w: int
    iw: int

    def __post_init__(self):
        if self.iw < self.w:
            raise ValueError("image width must be >= window size")

    @property
    def stage_count(self) -> int:
        return self.w * self.w

    @property
    def delays(self) -> tuple[int, ...]:
        w = self.w
        return tuple(0 if n == 0 else (1 if n % w else self.iw - w + 1) for n in range(w * w))


def eval_transposed(chain: MacChain, window, coeffs) -> int:
    """Stream ``window`` in raster order through the chain and read the sum.

    The window is laid into the first ``w`` columns of a raster
    ``chain.iw`` pixels wide; the chain output at the window's last pixel
    is the filter result.
    """
    w, iw = chain.w, chain.iw
    win = np.asarray(window, dtype=np.int64).reshape(w, w)
    coef = [int(c) for c in np.asarray(coeffs).reshape(-1)]
    delays = chain.delays
    depth = max(delays) + 1
    # Delays are >= 1 and < depth, so a read slot is never this cycle's write slot.
    hist = [[0] * depth for _ in range(w * w)]
    out = 0
    for t in range((w - 1) * iw + w):
        r, c = divmod(t, iw)
        x = int(win[r, c]) if c < w else 0
        for n in range(w * w):
            carry = hist[n - 1][(t - delays[n]) % depth] if n else 0
            out = carry + coef[n] * x
            hist[n][t % depth] = out
    return out


def compute_latency(cfg: FilterConfig, tree: TreeShape | None = None) -> int:
    """Cycles through the filter function alone (multiplier plus adders)."""
    if cfg.form is Form.TRANSPOSED:
        return cfg.mac_latency
    if tree is None:
        tree = build_tree(cfg.layout, cfg.w)
    return cfg.mult_latency + cfg.a_l * tree.stage_count


def log2_stages(w: int) -> int:
    return math.ceil(math.log2(w * w)) if w > 1 else 0
