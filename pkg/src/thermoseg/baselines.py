"""Conventional bottom-up segmenters used as comparison points.

Global and percentile thresholding plus exact 1-D k-means over raw
temperatures. These deliberately ignore spatial structure; the point of
shipping them is to quantify where they break on non-uniform backgrounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._cluster1d import kmeans_1d_cuts
from .errors import ParameterError
from .raster import BinaryMask, ThermalRaster

THRESHOLD_KINDS = ("absolute", "percentile")


@dataclass(frozen=True)
class ThresholdSpec:
    """A global threshold: absolute in degrees or a percentile of valid pixels."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in THRESHOLD_KINDS:
            raise ParameterError(
                f"threshold kind must be one of {THRESHOLD_KINDS}, got {self.kind!r}"
            )
        value = float(self.value)
        if not np.isfinite(value):
            raise ParameterError(f"threshold value must be finite, got {self.value!r}")
        if self.kind == "percentile" and not (0.0 <= value <= 100.0):
            raise ParameterError(f"percentile must be in [0, 100], got {self.value!r}")
        object.__setattr__(self, "value", value)

    def resolve(self, raster: ThermalRaster) -> float:
        """The effective temperature cutoff for this raster."""
        if self.kind == "absolute":
            return self.value
        # linear-interpolation percentile over valid pixels
        return float(np.percentile(raster.valid_values(), self.value))


def threshold_segment(raster: ThermalRaster, spec: ThresholdSpec) -> BinaryMask:
    """Mask of valid pixels strictly above the resolved threshold."""
    theta = spec.resolve(raster)
    values = raster.values > theta
    if raster.nodata_mask is not None:
        values &= ~raster.nodata_mask
    return BinaryMask(values)


def kmeans_temperature_segment(
    raster: ThermalRaster, k: int = 2, daytime: bool = True
) -> BinaryMask:
    """Exact 1-D k-means over temperatures; drop the sound-surface cluster.

    Daytime scenes keep everything except the lowest-mean cluster (sound
    deck is coolest); nighttime flips that to drop the highest-mean
    cluster. Deterministic: clusters are intervals over sorted distinct
    values found by dynamic programming, no random initialization.
    """
    if not (isinstance(k, int) and k >= 2):
        raise ParameterError(f"k must be an int >= 2, got {k!r}")
    uniq, cuts, _ = kmeans_1d_cuts(raster.valid_values(), k)

    # cuts[m] is the first distinct-value index of cluster m+1; means increase
    if daytime:
        lo_value = uniq[cuts[0]]  # first value above the lowest-mean cluster
        values = raster.values >= lo_value
    else:
        hi_value = uniq[cuts[k - 2] - 1]  # last value below the highest-mean cluster
        values = raster.values <= hi_value
    if raster.nodata_mask is not None:
        values &= ~raster.nodata_mask
    return BinaryMask(values)
