"""Machine-readable run reports (JSON per run, CSV per sweep)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

from .core import CycleReport, FilterConfig, ResourceReport

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ReportRecord:
    """Configuration echo plus timing, resources and throughput of one run.

    Field names are part of the output contract; add, never rename.
    """

    form: str
    layout: str
    border_policy: str
    border_constant: int
    border_scheme: str
    w: int
    pixel_bits: int
    coeff_format: str
    mult_latency: int
    mac_latency: int
    adder_latency: int
    simd_packing: bool
    image_width: int
    image_height: int
    first_output_cycle: int
    total_cycles: int
    stall_cycles: int
    output_width: int
    output_height: int
    pixels_consumed: int
    mult_dsp: int
    adder_dsp: int
    total_dsp: int
    adder_count: int
    stage_count: int
    simd_applied: bool
    f_clk_mhz: float | None = None
    fps: float | None = None
    verified: bool | None = None
    schema: int = SCHEMA_VERSION

    @classmethod
    def build(cls, cfg: FilterConfig, cycles: CycleReport, res: ResourceReport, image_width: int,
              image_height: int, f_clk_mhz=None, fps=None, verified=None) -> "ReportRecord":
        return cls(
            form=cfg.form.value,
            layout=cfg.layout.value,
            border_policy=cfg.border_policy.kind.value,
            border_constant=cfg.border_policy.constant,
            border_scheme=cfg.border_scheme.value,
            w=cfg.w,
            pixel_bits=cfg.pixel_bits,
            coeff_format=str(cfg.coeff_format),
            mult_latency=cfg.mult_latency,
            mac_latency=cfg.mac_latency,
            adder_latency=cfg.a_l,
            simd_packing=cfg.simd_packing,
            image_width=image_width,
            image_height=image_height,
            first_output_cycle=cycles.first_output_cycle,
            total_cycles=cycles.total_cycles,
            stall_cycles=cycles.stall_cycles,
            output_width=cycles.output_width,
            output_height=cycles.output_height,
            pixels_consumed=cycles.pixels_consumed,
            mult_dsp=res.mult_dsp,
            adder_dsp=res.adder_dsp,
            total_dsp=res.total_dsp,
            adder_count=res.adder_count,
            stage_count=res.stage_count,
            simd_applied=res.simd_applied,
            f_clk_mhz=f_clk_mhz,
            fps=fps,
            verified=verified,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ReportRecord":
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row[k] is None else row[k]) for k in columns})
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps(list(rows), indent=1)
