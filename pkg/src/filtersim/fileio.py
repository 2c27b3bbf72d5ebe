"""Binary PGM images and plain-text coefficient files."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import FixedFormat, Kernel, PixelImage


class PgmError(ValueError):
    pass


class BadMagic(PgmError):
    pass


class MaxvalUnsupported(PgmError):
    pass


class TruncatedData(PgmError):
    pass


class KernelFileError(ValueError):
    pass


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    tokens, i, n = [], 0, len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i >= n:
            raise TruncatedData("header ends early")
        if data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    # Exactly one whitespace byte separates maxval from the raster.
    if i >= n or not data[i:i + 1].isspace():
        raise TruncatedData("missing whitespace after header")
    return tokens, i + 1


def parse_pgm(data: bytes) -> PixelImage:
    if data[:2] != b"P5":
        raise BadMagic(f"expected P5 magic, got {data[:2]!r}")
    tokens, start = _header_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise PgmError(f"non-numeric header field in {tokens!r}") from None
    if width < 1 or height < 1:
        raise PgmError("image dimensions must be positive")
    if not 1 <= maxval <= 255:
        raise MaxvalUnsupported(f"maxval {maxval} needs 16-bit samples")
    raster = data[2 + start:]
    if len(raster) < width * height:
        raise TruncatedData(f"expected {width * height} bytes, found {len(raster)}")
    samples = np.frombuffer(raster[:width * height], dtype=np.uint8).reshape(height, width)
    if samples.max() > maxval:
        raise PgmError("sample exceeds maxval")
    return PixelImage(samples.astype(np.int64), depth=maxval.bit_length())


def load_pgm(path) -> PixelImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def format_pgm(img: PixelImage) -> bytes:
    if img.depth > 8:
        raise MaxvalUnsupported("only 8-bit images can be written")
    header = f"P5\n{img.width} {img.height}\n{(1 << img.depth) - 1}\n".encode("ascii")
    return header + img.samples.astype(np.uint8).tobytes()


def write_pgm(path, img: PixelImage) -> None:
    with open(path, "wb") as fh:
        fh.write(format_pgm(img))


def parse_kernel(text: str) -> Kernel:
    """Parse the coefficient-file format.

    Line 1 is the window size, line 2 the Q-format (``s1.14``), then one
    line of decimal coefficients per kernel row.  Values are converted
    with round-half-up; anything outside the format is an error.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) < 2:
        raise KernelFileError("need window size and Q-format lines")
    try:
        w = int(lines[0])
    except ValueError:
        raise KernelFileError(f"bad window size {lines[0]!r}") from None
    if w < 1 or w % 2 == 0:
        raise KernelFileError(f"window size must be odd, got {w}")
    try:
        fmt = FixedFormat.parse(lines[1])
    except ValueError as exc:
        raise KernelFileError(str(exc)) from None
    rows = lines[2:]
    if len(rows) != w:
        raise KernelFileError(f"expected {w} coefficient rows, got {len(rows)}")
    raw = []
    for r, ln in enumerate(rows):
        vals = ln.split()
        if len(vals) != w:
            raise KernelFileError(f"row {r}: expected {w} values, got {len(vals)}")
        out = []
        for v in vals:
            try:
                q = Fraction(v) * fmt.one + Fraction(1, 2)
            except (ValueError, ZeroDivisionError):
                raise KernelFileError(f"row {r}: bad number {v!r}") from None
            x = q.numerator // q.denominator
            if not fmt.contains(x):
                raise KernelFileError(f"row {r}: {v} does not fit {fmt}")
            out.append(x)
        raw.append(out)
    return Kernel(np.array(raw, dtype=np.int64), fmt)


def format_kernel(k: Kernel) -> str:
    lines = [str(k.w), str(k.format)]
    for row in k.coeffs:
        lines.append(" ".join(repr(float(Fraction(int(c), k.format.one))) for c in row))
    return "\n".join(lines) + "\n"


def load_kernel(path) -> Kernel:
    with open(path, encoding="utf-8") as fh:
        return parse_kernel(fh.read())


def write_kernel(path, k: Kernel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_kernel(k))
