"""Overlap metrics and the step-size sweep study."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RasterParseError
from .extraction import ExtractionConfig, extract_maxima_sequence, max_steps
from .io import _format_cell, atomic_write_text
from .raster import BinaryMask, ThermalRaster, connected_components
from .synth import GroundTruth

FINEST_DELTA = 0.05


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    if a.shape != b.shape:
        raise ParameterError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = int((a.values | b.values).sum())
    if union == 0:
        return 1.0
    return int((a.values & b.values).sum()) / union


def per_blob_iou(
    mask: BinaryMask, truth: GroundTruth, connectivity: int = 8
) -> dict[int, float]:
    """IoU per planted blob, judged against the mask components that touch it.

    For each blob footprint, the union of mask connected components
    intersecting it is compared to the footprint. A component that smears
    far beyond the blob drags its IoU down, so over-segmentation scores
    poorly rather than being rewarded for mere overlap.
    """
    if mask.shape != truth.shape:
        raise ParameterError(
            f"mask shape {mask.shape} does not match truth shape {truth.shape}"
        )
    components = connected_components(mask, connectivity)
    out: dict[int, float] = {}
    for blob_id in range(1, truth.blob_count + 1):
        footprint = truth.blob_mask(blob_id)
        touching = np.zeros(mask.shape, dtype=bool)
        for region in components:
            rows, cols = region.pixels[:, 0], region.pixels[:, 1]
            if footprint.values[rows, cols].any():
                touching[rows, cols] = True
        out[blob_id] = iou(BinaryMask(touching), footprint)
    return out


@dataclass(frozen=True)
class SweepRow:
    delta: float
    total_support_area: int
    area_diff_pct: float
    max_step: int


def step_size_sweep(
    t_s: ThermalRaster, cfg: ExtractionConfig, deltas: list[float]
) -> list[SweepRow]:
    """Extraction at each step size, with area drift vs the finest step.

    `deltas` must include the 0.05 sensitivity floor, which serves as the
    reference run. Rows come back ordered by delta.
    """
    if not deltas:
        raise ParameterError("deltas must be non-empty")
    ordered = sorted(float(d) for d in deltas)
    if not any(abs(d - FINEST_DELTA) < 1e-12 for d in ordered):
        raise ParameterError(
            f"deltas must include the finest step {FINEST_DELTA}, got {ordered}"
        )

    valid = t_s.valid_values()
    contrast = float(valid.max() - valid.min())

    areas: dict[float, int] = {}
    steps: dict[float, int] = {}
    for delta in ordered:
        run_cfg = ExtractionConfig(
            h_in=cfg.h_in,
            delta=delta,
            morph=cfg.morph,
            connectivity=cfg.connectivity,
            stability=cfg.stability,
            max_steps_override=cfg.max_steps_override,
        )
        sequence = extract_maxima_sequence(t_s, run_cfg)
        areas[delta] = sequence.support_union().area
        # flat rasters short-circuit extraction, so no step budget exists
        steps[delta] = max_steps(contrast, delta) if contrast > 0 else 0

    ref_area = areas[min(areas, key=lambda d: abs(d - FINEST_DELTA))]
    rows = []
    for delta in ordered:
        if ref_area == 0:
            diff = 0.0 if areas[delta] == 0 else float("inf")
        else:
            diff = abs(areas[delta] - ref_area) / ref_area * 100.0
        rows.append(SweepRow(delta, areas[delta], diff, steps[delta]))
    return rows


SWEEP_HEADER = "delta,total_support_area,area_diff_pct,max_step"


def format_sweep_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                (
                    _format_cell(row.delta),
                    str(row.total_support_area),
                    _format_cell(row.area_diff_pct),
                    str(row.max_step),
                )
            )
        )
    return "\n".join(lines) + "\n"


def save_sweep_csv(path, rows: list[SweepRow]) -> None:
    atomic_write_text(path, format_sweep_csv(rows))


def load_sweep_csv(path) -> list[SweepRow]:
    with open(path, "r", encoding="ascii") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines or lines[0] != SWEEP_HEADER:
        raise RasterParseError(f"sweep CSV must start with {SWEEP_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 4:
            raise RasterParseError(
                f"row {lineno} has {len(cells)} columns, expected 4"
            )
        try:
            rows.append(
                SweepRow(
                    float(cells[0]), int(cells[1]), float(cells[2]), int(cells[3])
                )
            )
        except ValueError:
            raise RasterParseError(f"row {lineno}: invalid cell") from None
    return rows
