"""Iterative regional-maxima extraction.

The sequence starts from a plain h-dome at the inlet offset h_in and then
applies the depth-weighted (regularized) marker at offsets growing by
delta per step. It stops at the contrast-derived step budget, earlier
when the total support area stabilizes in the MSER sense, or when the
supports empty out twice in a row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .morphology import MorphSettings, h_dome, reconstruct, regularized_marker
from .raster import (
    BinaryMask,
    RegionSet,
    ThermalRaster,
    connectivity_structure,
    regions_from_labels,
)

MIN_STEP = 0.05  # deg C; finer steps are below realistic camera sensitivity


@dataclass(frozen=True)
class StabilityParams:
    """MSER-style early stop on the total support area.

    The score for step n is (area[n+1] - area[n-1]) / area[n]; a run of
    `patience` consecutive scores below q_threshold stops the loop.
    """

    q_threshold: float = 0.05
    patience: int = 3

    def __post_init__(self):
        if not (self.q_threshold > 0):
            raise ParameterError(f"q_threshold must be > 0, got {self.q_threshold!r}")
        if not (isinstance(self.patience, int) and self.patience >= 1):
            raise ParameterError(f"patience must be an int >= 1, got {self.patience!r}")


@dataclass(frozen=True)
class ExtractionConfig:
    h_in: float = 0.5
    delta: float = 0.1
    morph: MorphSettings = MorphSettings()
    connectivity: int = 8
    stability: StabilityParams = StabilityParams()
    max_steps_override: int | None = None

    def __post_init__(self):
        if not (self.h_in > 0):
            raise ParameterError(f"h_in must be > 0, got {self.h_in!r}")
        if not (self.delta >= MIN_STEP):
            raise ParameterError(
                f"delta must be >= {MIN_STEP} deg C (sensitivity floor), got {self.delta!r}"
            )
        connectivity_structure(self.connectivity)
        if self.max_steps_override is not None and not (
            isinstance(self.max_steps_override, int) and self.max_steps_override >= 0
        ):
            raise ParameterError(
                f"max_steps_override must be an int >= 0, got {self.max_steps_override!r}"
            )


@dataclass(frozen=True)
class SequenceEntry:
    step: int
    offset: float
    regions: RegionSet


@dataclass(frozen=True)
class MaximaSequence:
    """Per-step region sets plus why the loop stopped.

    area_decreases lists steps whose total support area dropped below the
    previous step's; the regularized variant should grow monotonically on
    clean inputs, so decreases are flagged for the report rather than
    silently accepted.
    """

    entries: tuple[SequenceEntry, ...]
    stop_cause: str
    max_steps_allowed: int
    area_decreases: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def total_areas(self) -> list[int]:
        return [entry.regions.total_area for entry in self.entries]

    def support_union(self) -> BinaryMask:
        union = np.zeros(self.entries[0].regions.shape, dtype=bool)
        for entry in self.entries:
            union |= entry.regions.label_map > 0
        return BinaryMask(union)


def max_steps(max_contrast: float, delta: float) -> int:
    """floor(max_contrast / delta), with a 1e-9 nudge so exact multiples
    such as 3.3/0.1 are not pushed down a step by float division noise."""
    if not (max_contrast > 0):
        raise ParameterError(f"max_contrast must be > 0, got {max_contrast!r}")
    if not (delta > 0):
        raise ParameterError(f"delta must be > 0, got {delta!r}")
    return int(np.floor(max_contrast / delta + 1e-9))


def stability_score(area_prev: int, area_cur: int, area_next: int) -> float:
    """Relative growth (area_next - area_prev) / area_cur."""
    for name, value in (("area_prev", area_prev), ("area_cur", area_cur), ("area_next", area_next)):
        if value < 0:
            raise ParameterError(f"{name} must be >= 0, got {value!r}")
    if area_cur == 0:
        raise ParameterError("stability score is undefined for area_cur == 0")
    return (area_next - area_prev) / area_cur


def _empty_regions(raster: ThermalRaster, connectivity: int) -> RegionSet:
    return regions_from_labels(
        np.zeros(raster.shape, dtype=np.int32), connectivity
    )


def extract_maxima_sequence(
    t_s: ThermalRaster, cfg: ExtractionConfig | None = None
) -> MaximaSequence:
    """Run the offset loop on a smoothed raster and collect region sets.

    Entry 0 uses the unregularized h-dome at h_in; entry n >= 1 uses the
    depth-weighted marker at h_in + n*delta reconstructed under t_s.
    """
    cfg = cfg or ExtractionConfig()
    eps = cfg.morph.plateau_eps
    valid_values = t_s.valid_values()
    contrast = float(valid_values.max() - valid_values.min())

    if contrast <= eps:
        entry = SequenceEntry(0, cfg.h_in, _empty_regions(t_s, cfg.connectivity))
        return MaximaSequence((entry,), "no contrast", 0, ())

    if cfg.max_steps_override is not None:
        allowed = cfg.max_steps_override
    else:
        allowed = max_steps(contrast, cfg.delta)

    structure = connectivity_structure(cfg.connectivity)
    valid = t_s.valid_mask()

    def supports_of(dome_values: np.ndarray) -> RegionSet:
        above = (dome_values > eps) & valid
        labels, _ = ndimage.label(above, structure=structure)
        return regions_from_labels(labels, cfg.connectivity)

    entries = []
    _, support0 = h_dome(t_s, cfg.h_in, cfg.morph, cfg.connectivity)
    entries.append(SequenceEntry(0, cfg.h_in, support0))

    areas = [support0.total_area]
    decreases: list[int] = []
    stable_run = 0
    stop_cause = "max steps"

    for n in range(1, allowed + 1):
        offset = cfg.h_in + n * cfg.delta
        marker = regularized_marker(t_s, offset)
        rec = reconstruct(marker, t_s, cfg.morph.se, eps)
        dome_values = t_s.values - rec.values
        support = supports_of(dome_values)
        entries.append(SequenceEntry(n, offset, support))
        areas.append(support.total_area)

        if support.total_area < areas[-2]:
            decreases.append(n)

        if areas[-1] == 0 and areas[-2] == 0:
            stop_cause = "empty supports"
            break

        # stability uses a centered score, so it lags the newest step by one
        if len(areas) >= 3 and areas[-2] > 0:
            score = stability_score(areas[-3], areas[-2], areas[-1])
            if score < cfg.stability.q_threshold:
                stable_run += 1
            else:
                stable_run = 0
            if stable_run >= cfg.stability.patience:
                stop_cause = "stability"
                break

    return MaximaSequence(tuple(entries), stop_cause, allowed, tuple(decreases))
