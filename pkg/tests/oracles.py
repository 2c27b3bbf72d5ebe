"""Independent brute-force references, written without reusing library code.

Everything here is plain Python integers (arbitrary precision), one pixel
and one tap at a time.  Slow on purpose.
"""


def reflect(i, n, kind):
    """Source index for tap ``i`` on an axis of ``n`` pixels; None = constant."""
    if 0 <= i < n:
        return i
    if kind == "constant":
        return None
    if kind == "duplicate":
        return 0 if i < 0 else n - 1
    if kind == "wrap":
        return i % n
    if kind == "mirror-dup":
        # half-sample symmetric: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
        return -i - 1 if i < 0 else 2 * n - 1 - i
    if kind == "mirror-nodup":
        # whole-sample symmetric: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
        return -i if i < 0 else 2 * n - 2 - i
    raise ValueError(kind)


def dot(xs, ys):
    total = 0
    for x, y in zip(xs, ys):
        total += int(x) * int(y)
    return total


def quantize(acc, frac_bits, depth):
    if frac_bits:
        acc = (acc + (1 << (frac_bits - 1))) // (1 << frac_bits)
    return max(0, min(acc, (1 << depth) - 1))


def convolve(pixels, coeffs, kind, constant=0, frac_bits=14, depth=8, quantized=True):
    """Correlation of a nested-list image with a nested-list kernel.

    Returns nested lists.  ``kind='neglect'`` emits only full windows.
    """
    H, W, w = len(pixels), len(pixels[0]), len(coeffs)
    h = w // 2
    if kind == "neglect":
        rows, cols = range(h, H - h), range(h, W - h)
    else:
        rows, cols = range(H), range(W)
    out = []
    for r in rows:
        line = []
        for c in cols:
            acc = 0
            for dr in range(w):
                for dc in range(w):
                    rr = reflect(r + dr - h, H, kind)
                    cc = reflect(c + dc - h, W, kind)
                    x = constant if rr is None or cc is None else pixels[rr][cc]
                    acc += int(x) * int(coeffs[dr][dc])
            line.append(quantize(acc, frac_bits, depth) if quantized else acc)
        out.append(line)
    return out
