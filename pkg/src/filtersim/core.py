"""Domain types, fixed-point semantics and configuration checks.

Every other module builds on the types defined here.  All of them are
frozen after construction; numpy payloads are marked read-only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

DSP_ACC_BITS = 48
SIMD_LANE_BITS = 24
QUAD_LANE_BITS = 12


class Form(str, enum.Enum):
    DIRECT = "direct"
    TRANSPOSED = "transposed"


class Layout(str, enum.Enum):
    DSP = "dsp"
    LOG = "log"
    DSPCOMP = "dspcomp"


class PolicyKind(str, enum.Enum):
    NEGLECT = "neglect"
    CONSTANT = "constant"
    DUPLICATE = "duplicate"
    WRAP = "wrap"
    MIRROR_DUP = "mirror-dup"
    MIRROR_NODUP = "mirror-nodup"


class Scheme(str, enum.Enum):
    DIRECT_WINDOW_INPUT = "direct-window-input"
    CACHED_PRIMING = "cached-priming"
    NAIVE_OVERLAPPED = "naive-overlapped"
    OVERLAPPED_PF = "overlapped-pf"

    @property
    def stalls(self) -> bool:
        return self in (Scheme.DIRECT_WINDOW_INPUT, Scheme.CACHED_PRIMING)


# Adder latency per layout.  DSPCOMP = 2 (6:3 compressor) + 4 + 4 (two DSP adders).
COMPRESSOR_LATENCY = 2
DSP_ADD_LATENCY = 4
FABRIC_ADD_LATENCY = 1
ADDER_LATENCY = {
    Layout.DSP: DSP_ADD_LATENCY,
    Layout.LOG: FABRIC_ADD_LATENCY,
    Layout.DSPCOMP: COMPRESSOR_LATENCY + 2 * DSP_ADD_LATENCY,
}


@dataclass(frozen=True)
class FixedFormat:
    """Fixed-point interpretation of raw integers.

    A value ``v`` is stored as the raw integer ``round(v * 2**frac_bits)``.
    """

    signed: bool
    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 0 or self.frac_bits < 0:
            raise ValueError("bit counts must be non-negative")
        if not 1 <= self.width <= DSP_ACC_BITS:
            raise ValueError(f"total width {self.width} outside 1..{DSP_ACC_BITS}")

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits + int(self.signed)

    @property
    def min_raw(self) -> int:
        return -(1 << (self.int_bits + self.frac_bits)) if self.signed else 0

    @property
    def max_raw(self) -> int:
        return (1 << (self.int_bits + self.frac_bits)) - 1

    @property
    def one(self) -> int:
        """Raw encoding of +1.0 (may itself be out of range)."""
        return 1 << self.frac_bits

    def contains(self, raw: int) -> bool:
        return self.min_raw <= raw <= self.max_raw

    def to_real(self, raw: int) -> float:
        return raw / (1 << self.frac_bits)

    def __str__(self):
        return f"{'s' if self.signed else 'u'}{self.int_bits}.{self.frac_bits}"

    @classmethod
    def parse(cls, text: str) -> "FixedFormat":
        """Parse ``s1.14`` / ``u8.0`` notation."""
        text = text.strip()
        if len(text) < 4 or text[0] not in "su" or "." not in text:
            raise ValueError(f"bad Q-format {text!r}; expected s<int>.<frac>")
        ib, fb = text[1:].split(".", 1)
        try:
            return cls(text[0] == "s", int(ib), int(fb))
        except ValueError as exc:
            raise ValueError(f"bad Q-format {text!r}: {exc}") from None


Q1_14 = FixedFormat(signed=True, int_bits=1, frac_bits=14)


def pixel_format(depth: int) -> FixedFormat:
    return FixedFormat(signed=False, int_bits=depth, frac_bits=0)


def product_format(a: FixedFormat, b: FixedFormat) -> FixedFormat:
    """Format wide enough for any product of ``a`` and ``b`` operands.

    Two signed operands need one extra integer bit: (-2^m)(-2^n) = +2^(m+n).
    """
    extra = 1 if (a.signed and b.signed) else 0
    return FixedFormat(
        signed=a.signed or b.signed,
        int_bits=a.int_bits + b.int_bits + extra,
        frac_bits=a.frac_bits + b.frac_bits,
    )


def fixed_mul(a: int, a_fmt: FixedFormat, b: int, b_fmt: FixedFormat) -> int:
    """Exact product of two raw fixed-point operands, in ``product_format``."""
    if not a_fmt.contains(a):
        raise ValueError(f"operand {a} outside {a_fmt}")
    if not b_fmt.contains(b):
        raise ValueError(f"operand {b} outside {b_fmt}")
    return int(a) * int(b)


def round_saturate(acc, frac_bits: int, depth: int):
    """Round half-up at the binary point, then clamp to ``[0, 2**depth - 1]``.

    Works on Python ints and on int64 numpy arrays.
    """
    if frac_bits > 0:
        acc = (acc + (1 << (frac_bits - 1))) >> frac_bits
    hi = (1 << depth) - 1
    if isinstance(acc, np.ndarray):
        return np.clip(acc, 0, hi)
    return min(max(int(acc), 0), hi)


def _frozen_array(values, dtype=np.int64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PixelImage:
    """Single-channel raster of unsigned ``depth``-bit samples, shape (H, W)."""

    samples: np.ndarray
    depth: int = 8

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("samples must be a non-empty 2-D array")
        if not 1 <= self.depth <= 16:
            raise ValueError("depth must be in 1..16")
        if arr.dtype.kind not in "iu":
            raise TypeError("samples must be integers")
        if arr.min() < 0 or arr.max() >= (1 << self.depth):
            raise ValueError(f"sample outside [0, 2^{self.depth})")
        object.__setattr__(self, "samples", _frozen_array(arr))

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def raster(self) -> np.ndarray:
        return self.samples.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, PixelImage):
            return NotImplemented
        return self.depth == other.depth and np.array_equal(self.samples, other.samples)

    def __repr__(self):
        return f"PixelImage({self.height}x{self.width}, depth={self.depth})"


@dataclass(frozen=True, eq=False)
class Kernel:
    """w x w grid of raw fixed-point coefficients (the coefficient file)."""

    coeffs: np.ndarray
    format: FixedFormat = Q1_14

    def __post_init__(self):
        arr = np.asarray(self.coeffs)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("kernel must be square")
        w = arr.shape[0]
        if w < 1 or w % 2 == 0:
            raise ValueError(f"window size must be odd and >= 1, got {w}")
        lo, hi = int(arr.min()), int(arr.max())
        if lo < self.format.min_raw or hi > self.format.max_raw:
            raise ValueError(f"coefficient outside {self.format} range")
        object.__setattr__(self, "coeffs", _frozen_array(arr))

    @property
    def w(self) -> int:
        return self.coeffs.shape[0]

    @property
    def max_magnitude(self) -> int:
        return int(np.abs(self.coeffs).max())

    @classmethod
    def from_reals(cls, values, fmt: FixedFormat = Q1_14) -> "Kernel":
        raw = np.floor(np.asarray(values, dtype=float) * fmt.one + 0.5).astype(np.int64)
        return cls(raw, fmt)

    @classmethod
    def identity(cls, w: int, fmt: FixedFormat = Q1_14) -> "Kernel":
        c = np.zeros((w, w), dtype=np.int64)
        c[w // 2, w // 2] = fmt.one
        return cls(c, fmt)

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return self.format == other.format and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"Kernel(w={self.w}, format={self.format})"


@dataclass(frozen=True)
class BorderPolicy:
    kind: PolicyKind = PolicyKind.MIRROR_NODUP
    constant: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))

    @property
    def handled(self) -> bool:
        return self.kind is not PolicyKind.NEGLECT

    def __str__(self):
        if self.kind is PolicyKind.CONSTANT:
            return f"constant({self.constant})"
        return self.kind.value


NEGLECT = BorderPolicy(PolicyKind.NEGLECT)


@dataclass(frozen=True)
class FilterConfig:
    form: Form = Form.DIRECT
    layout: Layout = Layout.LOG
    border_policy: BorderPolicy = field(default_factory=BorderPolicy)
    border_scheme: Scheme = Scheme.OVERLAPPED_PF
    w: int = 7
    pixel_bits: int = 8
    coeff_format: FixedFormat = Q1_14
    mult_latency: int = 3
    mac_latency: int = 3
    adder_latency: int | None = None
    simd_packing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        object.__setattr__(self, "layout", Layout(self.layout))
        object.__setattr__(self, "border_scheme", Scheme(self.border_scheme))
        if isinstance(self.border_policy, (str, PolicyKind)):
            object.__setattr__(self, "border_policy", BorderPolicy(self.border_policy))

    @property
    def a_l(self) -> int:
        """Adder latency; the layout's value unless explicitly overridden."""
        return ADDER_LATENCY[self.layout] if self.adder_latency is None else self.adder_latency

    @property
    def half(self) -> int:
        return (self.w - 1) // 2

    @property
    def product_format(self) -> FixedFormat:
        return product_format(pixel_format(self.pixel_bits), self.coeff_format)

    @property
    def product_width(self) -> int:
        return self.pixel_bits + self.coeff_format.width

    @property
    def accumulator_width(self) -> int:
        return self.product_width + math.ceil(math.log2(self.w * self.w)) if self.w > 1 else self.product_width


@dataclass(frozen=True)
class ResourceReport:
    mult_dsp: int
    adder_dsp: int
    adder_count: int
    stage_count: int
    simd_applied: bool = False

    @property
    def total_dsp(self) -> int:
        return self.mult_dsp + self.adder_dsp


@dataclass(frozen=True)
class CycleReport:
    """Timing outcome of one simulation run.

    Cycles count from 1 at the cycle the first input pixel is accepted.
    """

    first_output_cycle: int
    total_cycles: int
    stall_cycles: int
    output_width: int
    output_height: int
    pixels_consumed: int = 0
    frames: int = 1


class IssueCode(str, enum.Enum):
    EVEN_WINDOW = "EvenWindow"
    TRANSPOSED_WITH_BORDER = "TransposedWithBorder"
    LATENCY_MISMATCH = "LatencyMismatch"
    WIDTH_OVERFLOW = "WidthOverflow"
    BAD_CONSTANT = "BadConstant"
    BAD_DEPTH = "BadDepth"


@dataclass(frozen=True)
class ConfigIssue:
    code: IssueCode
    message: str

    def __str__(self):
        return f"{self.code.value}: {self.message}"


class ConfigError(ValueError):
    """Raised by :func:`validate_config`; ``issues`` lists every violation."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))

    @property
    def codes(self) -> set:
        return {i.code for i in self.issues}


def check_config(cfg: FilterConfig) -> list[ConfigIssue]:
    issues = []
    add = lambda code, msg: issues.append(ConfigIssue(code, msg))  # noqa: E731

    if cfg.w < 1 or cfg.w % 2 == 0:
        add(IssueCode.EVEN_WINDOW, f"window size must be odd and >= 1, got {cfg.w}")
    if cfg.form is Form.TRANSPOSED and cfg.border_policy.handled:
        add(IssueCode.TRANSPOSED_WITH_BORDER,
            f"transposed form only supports neglect, got {cfg.border_policy}")
    if cfg.adder_latency is not None and cfg.adder_latency != ADDER_LATENCY[cfg.layout]:
        add(IssueCode.LATENCY_MISMATCH,
            f"{cfg.layout.value} adders take {ADDER_LATENCY[cfg.layout]} cycles, not {cfg.adder_latency}")
    if cfg.mult_latency < 1 or cfg.mac_latency < 1:
        add(IssueCode.LATENCY_MISMATCH, "multiplier and MAC latencies must be >= 1")
    if not 1 <= cfg.pixel_bits <= 16:
        add(IssueCode.BAD_DEPTH, f"pixel depth {cfg.pixel_bits} outside 1..16")
    elif cfg.w >= 1 and cfg.accumulator_width > DSP_ACC_BITS:
        add(IssueCode.WIDTH_OVERFLOW,
            f"accumulator needs {cfg.accumulator_width} bits, DSP holds {DSP_ACC_BITS}")
    pol = cfg.border_policy
    if pol.kind is PolicyKind.CONSTANT and not 0 <= pol.constant < (1 << cfg.pixel_bits):
        add(IssueCode.BAD_CONSTANT, f"constant {pol.constant} not a {cfg.pixel_bits}-bit pixel")
    return issues


def validate_config(cfg: FilterConfig) -> FilterConfig:
    """Return ``cfg`` unchanged, or raise :class:`ConfigError` listing every problem."""
    issues = check_config(cfg)
    if issues:
        raise ConfigError(issues)
    return cfg
