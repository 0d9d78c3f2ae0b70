"""Core raster containers and region bookkeeping.

Arrays are stored row-major with shape (height, width); pixel coordinates
are (row, col). Temperature values are degrees Celsius as float64. All
container types are frozen and hold read-only arrays, so results can be
shared between pipeline stages without defensive copies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import ndimage

from .errors import ParameterError

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


def connectivity_structure(connectivity: int) -> np.ndarray:
    """3x3 boolean structure for 4- or 8-connected neighborhoods."""
    if connectivity == 4:
        return _STRUCTURE_4.copy()
    if connectivity == 8:
        return _STRUCTURE_8.copy()
    raise ParameterError(f"connectivity must be 4 or 8, got {connectivity!r}")


def neighbor_offsets(connectivity: int) -> tuple[tuple[int, int], ...]:
    """(drow, dcol) offsets of the connected neighborhood, origin excluded."""
    structure = connectivity_structure(connectivity)
    offsets = []
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if (dr, dc) != (0, 0) and structure[dr + 1, dc + 1]:
                offsets.append((dr, dc))
    return tuple(offsets)


def _coerce_grid(values: np.ndarray, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if arr.ndim != 2:
        raise ParameterError(f"{what} must be a 2-D array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"{what} must have at least one row and column")
    return arr


def _coerce_nodata(mask, shape) -> np.ndarray | None:
    if mask is None:
        return None
    arr = np.ascontiguousarray(np.asarray(mask, dtype=bool))
    if arr.shape != shape:
        raise ParameterError(
            f"nodata mask shape {arr.shape} does not match raster shape {shape}"
        )
    if not arr.any():
        return None
    if arr.all():
        raise ParameterError("raster has no valid pixels")
    return arr


@dataclass(frozen=True)
class ThermalRaster:
    """Single-band temperature grid in deg C with an optional nodata mask.

    Non-nodata values must be finite. Values stored under nodata pixels are
    replaced by the minimum valid value so the array itself is always finite
    and nodata pixels can never win a max-based comparison.
    """

    values: np.ndarray
    nodata_mask: np.ndarray | None = None

    def __post_init__(self):
        vals = _coerce_grid(self.values, "raster values")
        nodata = _coerce_nodata(self.nodata_mask, vals.shape)
        if nodata is None:
            if not np.isfinite(vals).all():
                raise ParameterError("raster contains non-finite values")
        else:
            valid = vals[~nodata]
            if not np.isfinite(valid).all():
                raise ParameterError("raster contains non-finite values outside nodata")
            vals = vals.copy()
            vals[nodata] = valid.min()
            nodata.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "nodata_mask", nodata)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def valid_values(self) -> np.ndarray:
        """1-D array of the non-nodata values."""
        if self.nodata_mask is None:
            return self.values.ravel()
        return self.values[~self.nodata_mask]

    def valid_mask(self) -> np.ndarray:
        """Boolean map of the non-nodata pixels."""
        if self.nodata_mask is None:
            return np.ones(self.shape, dtype=bool)
        return ~self.nodata_mask

    def with_values(self, values: np.ndarray) -> "ThermalRaster":
        """Same footprint and nodata mask, new values."""
        return ThermalRaster(values, self.nodata_mask)


@dataclass(frozen=True)
class GradientRaster:
    """Per-pixel gradient magnitude in deg C per pixel (non-negative)."""

    values: np.ndarray
    nodata_mask: np.ndarray | None = None

    def __post_init__(self):
        vals = _coerce_grid(self.values, "gradient values")
        nodata = _coerce_nodata(self.nodata_mask, vals.shape)
        check = vals if nodata is None else vals[~nodata]
        if not np.isfinite(check).all():
            raise ParameterError("gradient contains non-finite values")
        if check.size and check.min() < 0:
            raise ParameterError("gradient magnitudes must be non-negative")
        if nodata is not None:
            vals = vals.copy()
            vals[nodata] = 0.0
            nodata.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "nodata_mask", nodata)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class BinaryMask:
    """Boolean pixel mask with the same (height, width) layout as rasters."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=bool))
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ParameterError("mask must be a non-empty 2-D array")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def area(self) -> int:
        return int(self.values.sum())

    def __or__(self, other: "BinaryMask") -> "BinaryMask":
        return BinaryMask(self.values | other.values)

    def __and__(self, other: "BinaryMask") -> "BinaryMask":
        return BinaryMask(self.values & other.values)

    def __invert__(self) -> "BinaryMask":
        return BinaryMask(~self.values)


@dataclass(frozen=True)
class Region:
    """One labeled region: pixel coordinates plus its inner boundary.

    pixels and inner_boundary_pixels are (n, 2) int arrays of (row, col).
    A pixel is inner-boundary iff at least one existing neighbor (same
    connectivity) lies outside the region; image borders do not count.
    """

    id: int
    area: int
    pixels: np.ndarray
    inner_boundary_pixels: np.ndarray


@dataclass(frozen=True)
class RegionSet:
    """Labeled regions over a raster footprint.

    label_map holds 0 for background and 1..K for regions; ids are
    contiguous and assigned in raster-scan order of first appearance, so
    the labeling is deterministic for a given input.
    """

    label_map: np.ndarray
    regions: tuple[Region, ...]
    connectivity: int

    def __len__(self) -> int:
        return len(self.regions)

    def __iter__(self) -> Iterator[Region]:
        return iter(self.regions)

    @property
    def shape(self) -> tuple[int, int]:
        return self.label_map.shape

    @property
    def total_area(self) -> int:
        return int((self.label_map > 0).sum())

    def support_mask(self) -> BinaryMask:
        return BinaryMask(self.label_map > 0)


def _inner_boundary_map(label_map: np.ndarray, connectivity: int) -> np.ndarray:
    """Labeled pixels with an existing neighbor carrying a different label."""
    h, w = label_map.shape
    differs = np.zeros((h, w), dtype=bool)
    for dr, dc in neighbor_offsets(connectivity):
        src_r = slice(max(0, -dr), h - max(0, dr))
        src_c = slice(max(0, -dc), w - max(0, dc))
        dst_r = slice(max(0, dr), h - max(0, -dr))
        dst_c = slice(max(0, dc), w - max(0, -dc))
        differs[src_r, src_c] |= label_map[src_r, src_c] != label_map[dst_r, dst_c]
    return differs & (label_map > 0)


def regions_from_labels(label_map: np.ndarray, connectivity: int) -> RegionSet:
    """Build a RegionSet from an integer label map (0 = background).

    Labels are compressed to contiguous 1..K preserving the order of first
    appearance in raster scan.
    """
    labels = np.ascontiguousarray(np.asarray(label_map))
    if labels.ndim != 2:
        raise ParameterError("label map must be 2-D")
    if labels.size and labels.min() < 0:
        raise ParameterError("label map must be non-negative")
    connectivity_structure(connectivity)  # validates the value

    flat = labels.ravel()
    present = flat[flat > 0]
    if present.size == 0:
        out = np.zeros(labels.shape, dtype=np.int32)
        out.setflags(write=False)
        return RegionSet(out, (), connectivity)

    # compress to 1..K in first-appearance order
    first_pos = {}
    uniq, first_idx = np.unique(flat, return_index=True)
    for lab, pos in zip(uniq.tolist(), first_idx.tolist()):
        if lab > 0:
            first_pos[lab] = pos
    ordered = sorted(first_pos, key=first_pos.__getitem__)
    remap = np.zeros(int(uniq.max()) + 1, dtype=np.int32)
    for new_id, lab in enumerate(ordered, start=1):
        remap[lab] = new_id
    compressed = remap[labels]

    boundary = _inner_boundary_map(compressed, connectivity)
    order = np.argsort(compressed.ravel(), kind="stable")
    sorted_labels = compressed.ravel()[order]
    starts = np.searchsorted(sorted_labels, np.arange(1, len(ordered) + 2))
    bflat = boundary.ravel()

    regions = []
    h, w = labels.shape
    for new_id in range(1, len(ordered) + 1):
        idx = order[starts[new_id - 1]: starts[new_id]]
        rows, cols = np.divmod(idx, w)
        pixels = np.column_stack([rows, cols]).astype(np.int32)
        on_boundary = bflat[idx]
        bpix = pixels[on_boundary]
        pixels.setflags(write=False)
        bpix.setflags(write=False)
        regions.append(
            Region(
                id=new_id,
                area=int(pixels.shape[0]),
                pixels=pixels,
                inner_boundary_pixels=bpix,
            )
        )
    compressed = np.ascontiguousarray(compressed, dtype=np.int32)
    compressed.setflags(write=False)
    return RegionSet(compressed, tuple(regions), connectivity)


def connected_components(mask: BinaryMask, connectivity: int = 8) -> RegionSet:
    """Label the connected true-pixels of a mask.

    8-connectivity by default, 4 selectable. Labels are contiguous 1..K in
    raster-scan order of first appearance.
    """
    structure = connectivity_structure(connectivity)
    labels, _ = ndimage.label(mask.values, structure=structure)
    return regions_from_labels(labels, connectivity)


def regions_from_mask_subset(
    parent: RegionSet, keep_ids: list[int]
) -> RegionSet:
    """New RegionSet containing only the given region ids, relabeled 1..K."""
    label_map = np.zeros(parent.shape, dtype=np.int32)
    regions = []
    for new_id, rid in enumerate(keep_ids, start=1):
        region = parent.regions[rid - 1]
        label_map[region.pixels[:, 0], region.pixels[:, 1]] = new_id
        regions.append(
            Region(
                id=new_id,
                area=region.area,
                pixels=region.pixels,
                inner_boundary_pixels=region.inner_boundary_pixels,
            )
        )
    label_map.setflags(write=False)
    return RegionSet(label_map, tuple(regions), parent.connectivity)
