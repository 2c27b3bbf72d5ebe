"""Reference convolution used as the functional oracle for the simulator."""

from __future__ import annotations

import numpy as np

from .core import BorderPolicy, Kernel, PixelImage, PolicyKind, round_saturate


class ReflectOutOfRange(ValueError):
    """Mirroring would index outside the image (image narrower than half-window)."""


class ImageSmallerThanWindow(ValueError):
    pass


# Returned by resolve_coord when the caller must substitute the constant.
CONSTANT = None


def resolve_coord(i: int, n: int, policy: BorderPolicy | PolicyKind):
    """Map a possibly out-of-range index ``i`` on an axis of length ``n``.

    Returns an in-range index, or :data:`CONSTANT` for constant extension.
    """
    kind = policy.kind if isinstance(policy, BorderPolicy) else PolicyKind(policy)
    if n < 1:
        raise ValueError("axis length must be >= 1")
    if 0 <= i < n:
        return i
    if kind is PolicyKind.NEGLECT:
        raise ValueError("neglect policy has no border pixels to resolve")
    if kind is PolicyKind.CONSTANT:
        return CONSTANT
    if kind is PolicyKind.DUPLICATE:
        return 0 if i < 0 else n - 1
    if kind is PolicyKind.WRAP:
        return i % n
    if kind is PolicyKind.MIRROR_DUP:
        j = -i - 1 if i < 0 else 2 * n - 1 - i
    else:  # MIRROR_NODUP
        j = -i if i < 0 else 2 * n - 2 - i
    if not 0 <= j < n:
        raise ReflectOutOfRange(f"index {i} reflects to {j}, outside axis of length {n}")
    return j


def output_shape(height: int, width: int, w: int, policy: BorderPolicy) -> tuple[int, int]:
    if policy.kind is PolicyKind.NEGLECT:
        if height < w or width < w:
            raise ImageSmallerThanWindow(f"{height}x{width} image, {w}x{w} window")
        return height - w + 1, width - w + 1
    return height, width


def _axis_map(n: int, w: int, policy: BorderPolicy) -> np.ndarray:
    """(n_out, w) source indices per output position; ``n`` marks the constant."""
    h = (w - 1) // 2
    centres = range(h, n - h) if policy.kind is PolicyKind.NEGLECT else range(n)
    rows = []
    for c in centres:
        idx = [resolve_coord(c + d, n, policy) for d in range(-h, h + 1)]
        rows.append([n if j is CONSTANT else j for j in idx])
    return np.array(rows, dtype=np.int64).reshape(-1, w)


def golden_accumulate(img: PixelImage, k: Kernel, policy: BorderPolicy) -> np.ndarray:
    """Full-precision sums of coefficient x pixel products, before rounding."""
    H, W, w = img.height, img.width, k.w
    output_shape(H, W, w, policy)
    rmap = _axis_map(H, w, policy)
    cmap = _axis_map(W, w, policy)
    # One extra row and column hold the constant-extension value.
    ext = np.full((H + 1, W + 1), policy.constant, dtype=np.int64)
    ext[:H, :W] = img.samples
    acc = np.zeros((rmap.shape[0], cmap.shape[0]), dtype=np.int64)
    for a in range(w):
        for b in range(w):
            coef = int(k.coeffs[a, b])
            if coef:
                acc += coef * ext[np.ix_(rmap[:, a], cmap[:, b])]
    return acc


def golden_convolve(img: PixelImage, k: Kernel, policy: BorderPolicy, depth: int | None = None) -> PixelImage:
    """Filter ``img`` with ``k`` under ``policy``.

    Correlation orientation (no kernel flip), rounded half-up at the
    coefficient binary point and saturated to the pixel range.
    """
    depth = img.depth if depth is None else depth
    acc = golden_accumulate(img, k, policy)
    return PixelImage(round_saturate(acc, k.format.frac_bits, depth), depth)
