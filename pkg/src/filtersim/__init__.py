"""Bit-accurate, cycle-accurate model of streaming 2D FPGA image filters.

The public surface is split by concern:

* :mod:`filtersim.core` -- fixed-point formats, images, kernels, configs;
* :mod:`filtersim.golden` -- direct reference convolution (the oracle);
* :mod:`filtersim.datapath` -- adder trees, MAC chain, latency;
* :mod:`filtersim.pipeline` -- the clocked simulator;
* :mod:`filtersim.estimator` -- closed-form DSP/latency/fps and sweeps.
"""

from .core import (
    BorderPolicy,
    ConfigError,
    CycleReport,
    FilterConfig,
    FixedFormat,
    Form,
    Kernel,
    Layout,
    PixelImage,
    PolicyKind,
    Q1_14,
    ResourceReport,
    Scheme,
    validate_config,
)
from .datapath import build_tree, compute_latency, eval_direct, eval_transposed, MacChain
from .estimator import Border, dsp_usage, latency_formula, sweep, throughput_fps
from .golden import golden_convolve
from .pipeline import init_state, simulate, simulate_frames, step

__version__ = "0.1.0"

__all__ = [
    "Border", "BorderPolicy", "ConfigError", "CycleReport", "FilterConfig", "FixedFormat", "Form",
    "Kernel", "Layout", "MacChain", "PixelImage", "PolicyKind", "Q1_14", "ResourceReport", "Scheme",
    "build_tree", "compute_latency", "dsp_usage", "eval_direct", "eval_transposed", "golden_convolve",
    "init_state", "latency_formula", "simulate", "simulate_frames", "step", "sweep", "throughput_fps",
    "validate_config",
]
