"""Grayscale morphology: dilation, reconstruction, domes, regional maxima.

Reconstruction by dilation of a marker G under a mask image F is the limit
of x -> min(dilate(x, se), F) started at G. Two implementations are
shipped on purpose: reconstruct_naive iterates that recurrence literally
and serves as the oracle, reconstruct runs a compiled sweep+queue kernel
that must agree with the oracle exactly (spot-checked at import-free cost
in the test suite; equality is a release gate, do not remove either side).

All operations treat out-of-bounds pixels as -inf (they never win a max)
and work equally on 1xN rasters, which is how the 1-D examples are
expressed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._reconstruct import hybrid_reconstruct
from .errors import ParameterError, PreconditionError
from .raster import (
    RegionSet,
    ThermalRaster,
    connectivity_structure,
    neighbor_offsets,
    regions_from_labels,
)

DEFAULT_PLATEAU_EPS = 1e-6


@dataclass(frozen=True)
class StructuringElement:
    """Flat structuring element given as (drow, dcol) offsets.

    Must contain the origin and be symmetric under point reflection, which
    is what the sweep-based reconstruction kernel requires.
    """

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        offs = tuple((int(r), int(c)) for r, c in self.offsets)
        if (0, 0) not in offs:
            raise ParameterError("structuring element must contain the origin")
        if len(set(offs)) != len(offs):
            raise ParameterError("structuring element offsets must be unique")
        for r, c in offs:
            if (-r, -c) not in offs:
                raise ParameterError(
                    f"structuring element is not point-symmetric: missing {(-r, -c)}"
                )
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def square(cls) -> "StructuringElement":
        """3x3 square, the default neighborhood."""
        return cls(tuple((r, c) for r in (-1, 0, 1) for c in (-1, 0, 1)))

    @classmethod
    def cross(cls) -> "StructuringElement":
        """3x3 cross (4-neighborhood plus origin)."""
        return cls(((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)))

    def footprint(self) -> np.ndarray:
        """Boolean footprint array with the origin at the center."""
        rmax = max(abs(r) for r, _ in self.offsets)
        cmax = max(abs(c) for _, c in self.offsets)
        fp = np.zeros((2 * rmax + 1, 2 * cmax + 1), dtype=bool)
        for r, c in self.offsets:
            fp[r + rmax, c + cmax] = True
        return fp

    def scan_split(self):
        """Offsets strictly before / after the origin in raster order."""
        prev = [(r, c) for r, c in self.offsets if r < 0 or (r == 0 and c < 0)]
        post = [(r, c) for r, c in self.offsets if r > 0 or (r == 0 and c > 0)]
        to_arr = lambda offs: np.array(sorted(offs), dtype=np.int64).reshape(-1, 2)
        return to_arr(prev), to_arr(post), to_arr(prev + post)


SQUARE3 = StructuringElement.square()
CROSS3 = StructuringElement.cross()


@dataclass(frozen=True)
class MorphSettings:
    """Knobs shared by the morphology operations."""

    se: StructuringElement = SQUARE3
    plateau_eps: float = DEFAULT_PLATEAU_EPS

    def __post_init__(self):
        if not (self.plateau_eps > 0):
            raise ParameterError(f"plateau_eps must be > 0, got {self.plateau_eps}")


def _filled(raster: ThermalRaster) -> np.ndarray:
    # nodata pixels already hold the valid minimum (raster invariant), so the
    # stored array is directly usable: nodata never wins a dilation.
    return raster.values


def dilate(raster: ThermalRaster, se: StructuringElement = SQUARE3) -> ThermalRaster:
    """Flat grayscale dilation; out-of-bounds neighbors act as -inf."""
    out = ndimage.maximum_filter(
        _filled(raster), footprint=se.footprint(), mode="constant", cval=-np.inf
    )
    return ThermalRaster(out, raster.nodata_mask)


def _check_pair(marker: ThermalRaster, mask: ThermalRaster, plateau_eps: float):
    if marker.shape != mask.shape:
        raise ParameterError(
            f"marker shape {marker.shape} does not match mask shape {mask.shape}"
        )
    g = _filled(marker)
    f = _filled(mask)
    excess = g - f
    worst = float(excess.max())
    if worst > plateau_eps:
        r, c = np.unravel_index(int(excess.argmax()), excess.shape)
        raise PreconditionError(
            f"marker exceeds mask by {worst:g} at pixel ({r}, {c})"
        )
    # clamp sub-eps excursions so the sandwich marker <= result <= mask is exact
    return np.minimum(g, f), f


def reconstruct(
    marker: ThermalRaster,
    mask: ThermalRaster,
    se: StructuringElement = SQUARE3,
    plateau_eps: float = DEFAULT_PLATEAU_EPS,
) -> ThermalRaster:
    """Grayscale reconstruction by dilation of marker under mask (fast path)."""
    g, f = _check_pair(marker, mask, plateau_eps)
    prev, post, both = se.scan_split()
    out = hybrid_reconstruct(g.copy(), f, prev, post, both)
    return ThermalRaster(out, mask.nodata_mask)


def reconstruct_naive(
    marker: ThermalRaster,
    mask: ThermalRaster,
    se: StructuringElement = SQUARE3,
    plateau_eps: float = DEFAULT_PLATEAU_EPS,
) -> ThermalRaster:
    """Reference fixpoint iteration of x -> min(dilate(x, se), mask).

    Kept deliberately literal; used as the oracle for the fast kernel.
    """
    g, f = _check_pair(marker, mask, plateau_eps)
    fp = se.footprint()
    x = g
    while True:
        y = np.minimum(
            ndimage.maximum_filter(x, footprint=fp, mode="constant", cval=-np.inf), f
        )
        if np.array_equal(y, x):
            return ThermalRaster(x, mask.nodata_mask)
        x = y


def _support_regions(
    dome_values: np.ndarray,
    raster: ThermalRaster,
    plateau_eps: float,
    connectivity: int,
) -> RegionSet:
    above = dome_values > plateau_eps
    if raster.nodata_mask is not None:
        above &= ~raster.nodata_mask
    labels, _ = ndimage.label(above, structure=connectivity_structure(connectivity))
    return regions_from_labels(labels, connectivity)


def h_dome(
    raster: ThermalRaster,
    h: float,
    settings: MorphSettings | None = None,
    connectivity: int = 8,
) -> tuple[ThermalRaster, RegionSet]:
    """Dome image F - reconstruct(F - h, F) and its support regions.

    The support is the set of connected components of {dome > plateau_eps}.
    h must exceed plateau_eps: offsets below the plateau tolerance are
    indistinguishable from flatness.
    """
    settings = settings or MorphSettings()
    if not (h > settings.plateau_eps):
        raise ParameterError(
            f"h must be > plateau_eps ({settings.plateau_eps:g}), got {h!r}"
        )
    f = _filled(raster)
    marker = ThermalRaster(f - h, raster.nodata_mask)
    rec = reconstruct(marker, raster, settings.se, settings.plateau_eps)
    dome_values = f - rec.values
    dome = ThermalRaster(dome_values, raster.nodata_mask)
    support = _support_regions(dome_values, raster, settings.plateau_eps, connectivity)
    return dome, support


def regularized_marker(
    raster: ThermalRaster,
    h: float,
    weights_from: ThermalRaster | None = None,
) -> ThermalRaster:
    """Depth-weighted marker F - lambda * h with lambda = w**3.

    w is the min-max normalization of the weight source (the raster itself
    by default), so hotter pixels receive offsets approaching h while the
    coolest receive none; a flat source yields w = 0 everywhere and the
    marker degenerates to F.
    """
    if not (h > 0):
        raise ParameterError(f"h must be > 0, got {h!r}")
    source = weights_from if weights_from is not None else raster
    if source.shape != raster.shape:
        raise ParameterError(
            f"weight source shape {source.shape} does not match raster shape {raster.shape}"
        )
    svals = source.valid_values()
    lo = float(svals.min())
    hi = float(svals.max())
    if hi > lo:
        w = (_filled(source) - lo) / (hi - lo)
    else:
        w = np.zeros(raster.shape)
    lam = w ** 3
    marker = _filled(raster) - lam * h
    return ThermalRaster(marker, raster.nodata_mask)


def regional_maxima(
    raster: ThermalRaster,
    settings: MorphSettings | None = None,
    connectivity: int = 8,
) -> RegionSet:
    """Connected plateaus strictly above all of their outward neighbors.

    A plateau collects pixels within plateau_eps of its seed value; it is a
    regional maximum iff its lowest member exceeds every existing outward
    valid neighbor by more than plateau_eps. Nodata pixels are never
    labeled and do not count as neighbors.
    """
    settings = settings or MorphSettings()
    eps = settings.plateau_eps
    vals = raster.values
    h, w = vals.shape
    valid = raster.valid_mask()
    offsets = neighbor_offsets(connectivity)

    labels = np.zeros((h, w), dtype=np.int32)
    visited = ~valid
    next_label = 0
    stack: list[tuple[int, int]] = []
    for sr in range(h):
        for sc in range(w):
            if visited[sr, sc]:
                continue
            seed_value = vals[sr, sc]
            stack.append((sr, sc))
            visited[sr, sc] = True
            plateau = []
            plateau_min = seed_value
            outward_max = -np.inf
            has_outward = False
            while stack:
                r, c = stack.pop()
                plateau.append((r, c))
                v = vals[r, c]
                if v < plateau_min:
                    plateau_min = v
                for dr, dc in offsets:
                    nr, nc = r + dr, c + dc
                    if not (0 <= nr < h and 0 <= nc < w):
                        continue
                    if not valid[nr, nc]:
                        continue
                    nv = vals[nr, nc]
                    if abs(nv - seed_value) <= eps:
                        if not visited[nr, nc]:
                            visited[nr, nc] = True
                            stack.append((nr, nc))
                    else:
                        has_outward = True
                        if nv > outward_max:
                            outward_max = nv
            if not has_outward or plateau_min - outward_max > eps:
                next_label += 1
                for r, c in plateau:
                    labels[r, c] = next_label
    return regions_from_labels(labels, connectivity)
