import numpy as np
import pytest

from filtersim.core import Kernel, PixelImage, Q1_14

POLICIES = ["neglect", "constant", "duplicate", "wrap", "mirror-dup", "mirror-nodup"]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h, w, depth=8):
    return PixelImage(rng.integers(0, 1 << depth, size=(h, w)), depth)


def random_kernel(rng, w, fmt=Q1_14, scale=None):
    """Random coefficients; ``scale`` limits magnitude so outputs are not all saturated."""
    hi = fmt.max_raw if scale is None else scale
    lo = max(fmt.min_raw, -hi)
    return Kernel(rng.integers(lo, hi + 1, size=(w, w)), fmt)
