"""Gradient-statistics screening and the full segmentation pipeline.

The reference population D_g is the high cluster of an exact 1-D 2-means
split over the positive gradient magnitudes, cleaned by a minimum-area
filter. Candidate regions from the extraction loop survive only if the
gradient mean over their inner boundary falls inside a band around the
reference mean AND their boundary coefficient of variation falls inside a
band around the reference CV. The final mask is the union of survivors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ._cluster1d import _distinct_weighted, best_two_split
from .errors import (
    DegenerateInputError,
    NoReferenceError,
    ParameterError,
    StageError,
    ThermosegError,
)
from .extraction import MaximaSequence, extract_maxima_sequence
from .raster import (
    BinaryMask,
    GradientRaster,
    RegionSet,
    ThermalRaster,
    connected_components,
    regions_from_mask_subset,
)
from .smoothing import diffuse, gradient_magnitude

if TYPE_CHECKING:  # pragma: no cover
    from .config import PipelineConfig


def two_means_1d(values) -> tuple[float, float, float]:
    """Exact 2-means of a 1-D sample by exhaustive split search.

    Returns (threshold, low_mean, high_mean) with the threshold at the
    midpoint of the cluster means; for the optimal split every low value
    lies below it and every high value above, so thresholding reproduces
    the partition. Deterministic: no random initialization, and the same
    input always yields the same split.
    """
    uniq, weights = _distinct_weighted(values)
    if uniq.size < 2:
        raise DegenerateInputError(
            f"2-means needs at least 2 distinct values, got {uniq.size}"
        )
    _, low_mean, high_mean = best_two_split(uniq, weights)
    return (low_mean + high_mean) / 2.0, low_mean, high_mean


@dataclass(frozen=True)
class ReferenceStats:
    """Mean, spread and CV of the reference gradient population."""

    m_grad: float
    delta_std: float

    def __post_init__(self):
        if not (self.m_grad > 0):
            raise ParameterError(f"m_grad must be > 0, got {self.m_grad!r}")
        if not (self.delta_std >= 0):
            raise ParameterError(f"delta_std must be >= 0, got {self.delta_std!r}")

    @property
    def v_var(self) -> float:
        return self.delta_std / self.m_grad


@dataclass(frozen=True)
class ScreeningBands:
    """Acceptance band factors around the reference statistics.

    Mean band: [m_grad - delta_std * mean_halfwidth_factor,
                m_grad + delta_std * mean_halfwidth_factor].
    CV band:   [v_var * cv_low_factor, v_var * cv_high_factor].
    """

    mean_halfwidth_factor: float = 0.5
    cv_low_factor: float = 0.5
    cv_high_factor: float = 1.9

    def __post_init__(self):
        if not (self.mean_halfwidth_factor > 0):
            raise ParameterError(
                f"mean_halfwidth_factor must be > 0, got {self.mean_halfwidth_factor!r}"
            )
        if not (0 < self.cv_low_factor < self.cv_high_factor):
            raise ParameterError(
                "cv factors must satisfy 0 < low < high, got "
                f"{self.cv_low_factor!r}, {self.cv_high_factor!r}"
            )

    def mean_band(self, stats: ReferenceStats) -> tuple[float, float]:
        half = stats.delta_std * self.mean_halfwidth_factor
        return stats.m_grad - half, stats.m_grad + half

    def cv_band(self, stats: ReferenceStats) -> tuple[float, float]:
        return stats.v_var * self.cv_low_factor, stats.v_var * self.cv_high_factor


@dataclass(frozen=True)
class RefParams:
    """Reference-extraction settings: size filter and optional exclusions."""

    min_area: int = 25
    exclusion_mask: BinaryMask | None = None

    def __post_init__(self):
        if not (isinstance(self.min_area, int) and self.min_area >= 1):
            raise ParameterError(f"min_area must be an int >= 1, got {self.min_area!r}")


def reference_stats(
    g_s: GradientRaster,
    params: RefParams | None = None,
    connectivity: int = 8,
) -> tuple[ReferenceStats, BinaryMask]:
    """Extract the high-gradient reference population D_g and its stats.

    Excluded and nodata pixels are zeroed first, the positive remainder is
    split by exact 2-means, and high-cluster components smaller than
    min_area are dropped as specks.
    """
    params = params or RefParams()
    g = g_s.values.copy()
    if params.exclusion_mask is not None:
        if params.exclusion_mask.shape != g_s.shape:
            raise ParameterError(
                f"exclusion mask shape {params.exclusion_mask.shape} "
                f"does not match gradient shape {g_s.shape}"
            )
        g[params.exclusion_mask.values] = 0.0
    if g_s.nodata_mask is not None:
        g[g_s.nodata_mask] = 0.0

    positive = g[g > 0]
    try:
        threshold, _, _ = two_means_1d(positive)
    except (DegenerateInputError, ParameterError) as exc:
        raise NoReferenceError(f"cannot split gradient population: {exc}") from exc

    candidates = BinaryMask(g > threshold)
    components = connected_components(candidates, connectivity)
    keep = [r.id for r in components if r.area >= params.min_area]
    if not keep:
        raise NoReferenceError(
            f"no high-gradient component reaches min_area={params.min_area}"
        )
    d_g = regions_from_mask_subset(components, keep).support_mask()

    dvals = g_s.values[d_g.values]
    stats = ReferenceStats(float(dvals.mean()), float(dvals.std()))
    return stats, d_g


@dataclass(frozen=True)
class ScreenDecision:
    region_id: int
    area: int
    boundary_pixel_count: int
    boundary_mean: float
    boundary_cv: float
    kept: bool
    reason: str  # kept | too-small | mean-out-of-band | cv-out-of-band | mean+cv-out-of-band


def screen_regions(
    candidates: RegionSet,
    g_s: GradientRaster,
    stats: ReferenceStats,
    bands: ScreeningBands | None = None,
) -> tuple[RegionSet, tuple[ScreenDecision, ...]]:
    """Keep regions whose boundary-gradient statistics match the reference.

    Regions with fewer than 3 inner-boundary pixels are rejected as
    too-small (no meaningful spread). Returns the surviving regions
    relabeled 1..K plus the per-region decisions for reporting.
    """
    bands = bands or ScreeningBands()
    if candidates.shape != g_s.shape:
        raise ParameterError(
            f"region set shape {candidates.shape} does not match gradient shape {g_s.shape}"
        )
    mean_lo, mean_hi = bands.mean_band(stats)
    cv_lo, cv_hi = bands.cv_band(stats)

    decisions = []
    keep_ids = []
    for region in candidates:
        boundary = region.inner_boundary_pixels
        if boundary.shape[0] < 3:
            decisions.append(
                ScreenDecision(
                    region.id, region.area, boundary.shape[0],
                    float("nan"), float("nan"), False, "too-small",
                )
            )
            continue
        bvals = g_s.values[boundary[:, 0], boundary[:, 1]]
        bmean = float(bvals.mean())
        bcv = float(bvals.std() / bmean) if bmean > 0 else float("inf")
        mean_ok = mean_lo <= bmean <= mean_hi
        cv_ok = cv_lo <= bcv <= cv_hi
        if mean_ok and cv_ok:
            keep_ids.append(region.id)
            reason = "kept"
        elif mean_ok:
            reason = "cv-out-of-band"
        elif cv_ok:
            reason = "mean-out-of-band"
        else:
            reason = "mean+cv-out-of-band"
        decisions.append(
            ScreenDecision(
                region.id, region.area, boundary.shape[0],
                bmean, bcv, reason == "kept", reason,
            )
        )
    kept = regions_from_mask_subset(candidates, keep_ids)
    return kept, tuple(decisions)


@dataclass(frozen=True)
class StepSummary:
    step: int
    offset: float
    region_count: int
    kept_count: int
    support_area: int
    kept_area: int


@dataclass(frozen=True)
class SegmentReport:
    """Everything needed to audit or reproduce a segmentation run."""

    config_text: str
    stats: ReferenceStats | None
    reference_area: int
    steps: tuple[StepSummary, ...]
    decisions: tuple[ScreenDecision, ...]
    decision_steps: tuple[int, ...]
    stop_cause: str
    max_steps_allowed: int
    support_union_area: int
    mask_area: int
    area_decreases: tuple[int, ...]

    def to_text(self) -> str:
        lines = ["# segmentation report", "", "## resolved config"]
        lines += [line for line in self.config_text.splitlines()]
        lines += ["", "## reference"]
        if self.stats is None:
            lines.append("no reference (flat raster)")
        else:
            lines.append(f"m_grad={self.stats.m_grad!r}")
            lines.append(f"delta_std={self.stats.delta_std!r}")
            lines.append(f"v_var={self.stats.v_var!r}")
            lines.append(f"reference_area={self.reference_area}")
        lines += ["", "## steps  (step offset regions kept support_area kept_area)"]
        for s in self.steps:
            lines.append(
                f"{s.step} {s.offset!r} {s.region_count} {s.kept_count} "
                f"{s.support_area} {s.kept_area}"
            )
        lines += ["", "## region decisions  (step region area boundary mean cv verdict)"]
        for step, d in zip(self.decision_steps, self.decisions):
            lines.append(
                f"{step} {d.region_id} {d.area} {d.boundary_pixel_count} "
                f"{d.boundary_mean!r} {d.boundary_cv!r} {d.reason}"
            )
        lines += [
            "",
            f"stop_cause={self.stop_cause}",
            f"max_steps={self.max_steps_allowed}",
            f"support_union_area={self.support_union_area}",
            f"mask_area={self.mask_area}",
            f"area_decreases={','.join(map(str, self.area_decreases)) or 'none'}",
        ]
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        lines = [line for line in self.config_text.splitlines() if line.strip()]
        lines.append(f"report.stop_cause={self.stop_cause}")
        lines.append(f"report.max_steps={self.max_steps_allowed}")
        if self.stats is not None:
            lines.append(f"report.m_grad={self.stats.m_grad!r}")
            lines.append(f"report.delta_std={self.stats.delta_std!r}")
            lines.append(f"report.v_var={self.stats.v_var!r}")
        lines.append(f"report.reference_area={self.reference_area}")
        lines.append(f"report.steps={len(self.steps)}")
        for s in self.steps:
            prefix = f"report.step.{s.step}"
            lines.append(f"{prefix}.offset={s.offset!r}")
            lines.append(f"{prefix}.regions={s.region_count}")
            lines.append(f"{prefix}.kept={s.kept_count}")
            lines.append(f"{prefix}.support_area={s.support_area}")
            lines.append(f"{prefix}.kept_area={s.kept_area}")
        lines.append(f"report.support_union_area={self.support_union_area}")
        lines.append(f"report.mask_area={self.mask_area}")
        lines.append(
            f"report.area_decreases={','.join(map(str, self.area_decreases)) or 'none'}"
        )
        return "\n".join(lines) + "\n"


def segment(
    raw: ThermalRaster, cfg: "PipelineConfig | None" = None
) -> tuple[BinaryMask, SegmentReport]:
    """Full pipeline: diffuse, gradient, reference stats, extraction, screening.

    Raises StageError naming the failing stage. The returned mask is always
    a subset of the union of extracted supports minus the exclusion mask.
    """
    from .config import PipelineConfig, format_config

    cfg = cfg or PipelineConfig.defaults()
    config_text = format_config(cfg)

    def run_stage(stage, fn):
        try:
            return fn()
        except ThermosegError as exc:
            raise StageError(stage, str(exc)) from exc

    t_s = run_stage("smoothing", lambda: diffuse(raw, cfg.diffusion))
    g_s = run_stage("gradient", lambda: gradient_magnitude(t_s, cfg.diffusion.sigma))

    valid_values = t_s.valid_values()
    contrast = float(valid_values.max() - valid_values.min())
    if contrast <= cfg.extraction.morph.plateau_eps:
        mask = BinaryMask.empty(raw.width, raw.height)
        report = SegmentReport(
            config_text=config_text,
            stats=None,
            reference_area=0,
            steps=(),
            decisions=(),
            decision_steps=(),
            stop_cause="no contrast",
            max_steps_allowed=0,
            support_union_area=0,
            mask_area=0,
            area_decreases=(),
        )
        return mask, report

    stats, d_g = run_stage(
        "reference",
        lambda: reference_stats(g_s, cfg.ref, cfg.extraction.connectivity),
    )
    sequence = run_stage(
        "extraction", lambda: extract_maxima_sequence(t_s, cfg.extraction)
    )

    union = np.zeros(raw.shape, dtype=bool)
    mask_values = np.zeros(raw.shape, dtype=bool)
    steps = []
    decisions: list[ScreenDecision] = []
    decision_steps: list[int] = []
    for entry in sequence.entries:
        kept, entry_decisions = run_stage(
            "screening",
            lambda e=entry: screen_regions(e.regions, g_s, stats, cfg.bands),
        )
        union |= entry.regions.label_map > 0
        mask_values |= kept.label_map > 0
        steps.append(
            StepSummary(
                step=entry.step,
                offset=entry.offset,
                region_count=len(entry.regions),
                kept_count=len(kept),
                support_area=entry.regions.total_area,
                kept_area=kept.total_area,
            )
        )
        decisions.extend(entry_decisions)
        decision_steps.extend([entry.step] * len(entry_decisions))

    if cfg.ref.exclusion_mask is not None:
        mask_values &= ~cfg.ref.exclusion_mask.values

    assert not (mask_values & ~union).any(), "mask escaped the support union"

    mask = BinaryMask(mask_values)
    report = SegmentReport(
        config_text=config_text,
        stats=stats,
        reference_area=d_g.area,
        steps=tuple(steps),
        decisions=tuple(decisions),
        decision_steps=tuple(decision_steps),
        stop_cause=sequence.stop_cause,
        max_steps_allowed=sequence.max_steps_allowed,
        support_union_area=int(union.sum()),
        mask_area=mask.area,
        area_decreases=sequence.area_decreases,
    )
    return mask, report
