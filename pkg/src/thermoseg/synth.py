"""Deterministic synthetic inputs: a 1-D multi-peak signal and 2-D scenes.

Scenes are background + planted blob contributions + optional Gaussian
noise. All randomness comes from one 64-bit seed through NumPy's
default_rng (PCG64) via standard_normal, so (spec, seed) reproduces a
raster bit-exactly; the noiseless layers never touch the generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import parse_kv_lines
from .errors import ParameterError, RasterParseError
from .io import atomic_write_text
from .raster import BinaryMask, ThermalRaster, _inner_boundary_map

BACKGROUND_KINDS = ("constant", "ramp", "smooth")
BLOB_PROFILES = ("gaussian", "plateau")


def multipeak_signal(
    x_min: float, x_max: float, n_samples: int, offset: float = 3.0
):
    """Uniform samples of f(x) = sin(x) + 2 cos(2x + 5) + 3 sin(3x) and f − offset.

    Returns (x, f, g) with g = f - offset exactly; the pair is the standard
    1-D fixture for reconstruction and dome demos.
    """
    if not (isinstance(n_samples, int) and n_samples >= 2):
        raise ParameterError(f"n_samples must be an int >= 2, got {n_samples!r}")
    if not (x_min < x_max):
        raise ParameterError(f"need x_min < x_max, got {x_min!r} >= {x_max!r}")
    x = np.linspace(float(x_min), float(x_max), n_samples)
    f = np.sin(x) + 2.0 * np.cos(2.0 * x + 5.0) + 3.0 * np.sin(3.0 * x)
    return x, f, f - offset


@dataclass(frozen=True)
class Background:
    """Sound-surface temperature field.

    constant: base everywhere. ramp: base + grad_row*row + grad_col*col.
    smooth: base + amplitude * sin(2*pi*col/wavelength), a low-frequency
    drift across columns; wavelength = 2*width turns it into a single
    warm crest peaking at the image center.
    """

    kind: str
    base: float = 20.0
    grad_row: float = 0.0
    grad_col: float = 0.0
    amplitude: float = 0.0
    wavelength: float = 64.0

    def __post_init__(self):
        if self.kind not in BACKGROUND_KINDS:
            raise ParameterError(
                f"background kind must be one of {BACKGROUND_KINDS}, got {self.kind!r}"
            )
        for name in ("base", "grad_row", "grad_col", "amplitude", "wavelength"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"background {name} must be finite")
        if self.kind == "smooth" and not (self.wavelength > 0):
            raise ParameterError(f"wavelength must be > 0, got {self.wavelength!r}")

    def render(self, height: int, width: int) -> np.ndarray:
        rows = np.arange(height, dtype=np.float64)[:, None]
        cols = np.arange(width, dtype=np.float64)[None, :]
        if self.kind == "constant":
            return np.full((height, width), float(self.base))
        if self.kind == "ramp":
            return self.base + self.grad_row * rows + self.grad_col * cols
        drift = self.base + self.amplitude * np.sin(2.0 * np.pi * cols / self.wavelength)
        return np.broadcast_to(drift, (height, width)).copy()


@dataclass(frozen=True)
class BlobSpec:
    """One planted defect: a warm (or cold) spot of given radius.

    gaussian profile: contrast * exp(-ln2 * (d/radius)^2), half the peak at
    d = radius. plateau profile: contrast inside d <= radius, zero outside.
    Both give the footprint {d <= radius} under the half-peak convention.
    """

    center_row: float
    center_col: float
    radius: float
    contrast: float
    profile: str = "gaussian"

    def __post_init__(self):
        if self.profile not in BLOB_PROFILES:
            raise ParameterError(
                f"blob profile must be one of {BLOB_PROFILES}, got {self.profile!r}"
            )
        if not (np.isfinite(self.radius) and self.radius >= 1):
            raise ParameterError(f"blob radius must be >= 1, got {self.radius!r}")
        if not np.isfinite(self.contrast) or self.contrast == 0:
            raise ParameterError(
                f"blob contrast must be finite and nonzero, got {self.contrast!r}"
            )
        for name in ("center_row", "center_col"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"blob {name} must be finite")

    def distances(self, height: int, width: int) -> np.ndarray:
        rows = np.arange(height, dtype=np.float64)[:, None]
        cols = np.arange(width, dtype=np.float64)[None, :]
        return np.hypot(rows - self.center_row, cols - self.center_col)

    def render(self, height: int, width: int) -> np.ndarray:
        d = self.distances(height, width)
        if self.profile == "plateau":
            return np.where(d <= self.radius, float(self.contrast), 0.0)
        return self.contrast * np.exp(-np.log(2.0) * (d / self.radius) ** 2)

    def footprint(self, height: int, width: int) -> np.ndarray:
        return self.distances(height, width) <= self.radius


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    background: Background
    blobs: tuple[BlobSpec, ...] = ()
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.width, int) and self.width >= 1):
            raise ParameterError(f"width must be an int >= 1, got {self.width!r}")
        if not (isinstance(self.height, int) and self.height >= 1):
            raise ParameterError(f"height must be an int >= 1, got {self.height!r}")
        if not (np.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ParameterError(f"noise_std must be >= 0, got {self.noise_std!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ParameterError(f"seed must be a 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "blobs", tuple(self.blobs))


@dataclass(frozen=True)
class GroundTruth:
    """Planted-defect reference: label 0 = sound surface, 1..K = blob index.

    Footprints use the half-peak convention; where blobs overlap the later
    blob in spec order wins.
    """

    label_map: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = np.asarray(self.label_map, dtype=np.int32)
        labels.setflags(write=False)
        object.__setattr__(self, "label_map", labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.label_map.shape

    @property
    def blob_count(self) -> int:
        return int(self.label_map.max(initial=0))

    def defect_mask(self) -> BinaryMask:
        return BinaryMask(self.label_map > 0)

    def blob_mask(self, blob_id: int) -> BinaryMask:
        if not (1 <= blob_id <= self.blob_count):
            raise ParameterError(
                f"blob_id must be in 1..{self.blob_count}, got {blob_id!r}"
            )
        return BinaryMask(self.label_map == blob_id)

    def blob_boundary(self, blob_id: int, connectivity: int = 8) -> np.ndarray:
        """(n, 2) row/col pixels of the blob footprint's inner boundary."""
        mask = self.blob_mask(blob_id).values.astype(np.int32)
        boundary = _inner_boundary_map(mask, connectivity) & (mask > 0)
        return np.argwhere(boundary).astype(np.int32)


def generate_scene(spec: SceneSpec) -> tuple[ThermalRaster, GroundTruth]:
    """Render a scene; identical spec (same seed) gives bit-identical output."""
    h, w = spec.height, spec.width
    values = spec.background.render(h, w)
    labels = np.zeros((h, w), dtype=np.int32)
    for index, blob in enumerate(spec.blobs, start=1):
        footprint = blob.footprint(h, w)
        if not footprint.any():
            raise ParameterError(
                f"blob {index} lies fully outside the {w}x{h} raster"
            )
        values += blob.render(h, w)
        labels[footprint] = index
    if spec.noise_std > 0:
        rng = np.random.default_rng(spec.seed)
        values += rng.standard_normal((h, w)) * spec.noise_std
    return ThermalRaster(values), GroundTruth(labels)


# --- plain-text serialization -------------------------------------------

def format_scene_spec(spec: SceneSpec) -> str:
    lines = [
        f"width={spec.width}",
        f"height={spec.height}",
        f"background.kind={spec.background.kind}",
        f"background.base={spec.background.base!r}",
    ]
    bg = spec.background
    if bg.kind == "ramp":
        lines.append(f"background.grad_row={bg.grad_row!r}")
        lines.append(f"background.grad_col={bg.grad_col!r}")
    elif bg.kind == "smooth":
        lines.append(f"background.amplitude={bg.amplitude!r}")
        lines.append(f"background.wavelength={bg.wavelength!r}")
    lines.append(f"noise_std={spec.noise_std!r}")
    lines.append(f"seed={spec.seed}")
    lines.append(f"blobs={len(spec.blobs)}")
    for index, blob in enumerate(spec.blobs, start=1):
        prefix = f"blob.{index}"
        lines.append(f"{prefix}.center_row={blob.center_row!r}")
        lines.append(f"{prefix}.center_col={blob.center_col!r}")
        lines.append(f"{prefix}.radius={blob.radius!r}")
        lines.append(f"{prefix}.contrast={blob.contrast!r}")
        lines.append(f"{prefix}.profile={blob.profile}")
    return "\n".join(lines) + "\n"


def parse_scene_spec(text: str) -> SceneSpec:
    raw = parse_kv_lines(text, kind="scene spec")

    def take(key, converter, default=None):
        if key not in raw:
            if default is None:
                raise ParameterError(f"scene spec missing required key {key!r}")
            return default
        value = raw.pop(key)
        try:
            return converter(value)
        except ValueError:
            raise ParameterError(
                f"scene spec key {key}: invalid value {value!r}"
            ) from None

    width = take("width", int)
    height = take("height", int)
    background = Background(
        kind=take("background.kind", str),
        base=take("background.base", float, 20.0),
        grad_row=take("background.grad_row", float, 0.0),
        grad_col=take("background.grad_col", float, 0.0),
        amplitude=take("background.amplitude", float, 0.0),
        wavelength=take("background.wavelength", float, 64.0),
    )
    noise_std = take("noise_std", float, 0.0)
    seed = take("seed", int, 0)
    blob_count = take("blobs", int, 0)
    blobs = []
    for index in range(1, blob_count + 1):
        prefix = f"blob.{index}"
        blobs.append(
            BlobSpec(
                center_row=take(f"{prefix}.center_row", float),
                center_col=take(f"{prefix}.center_col", float),
                radius=take(f"{prefix}.radius", float),
                contrast=take(f"{prefix}.contrast", float),
                profile=take(f"{prefix}.profile", str, "gaussian"),
            )
        )
    if raw:
        raise ParameterError(f"unknown scene spec keys: {sorted(raw)}")
    return SceneSpec(
        width=width,
        height=height,
        background=background,
        blobs=tuple(blobs),
        noise_std=noise_std,
        seed=seed,
    )


def save_truth(path, truth: GroundTruth) -> None:
    """Ground-truth label map as integer CSV (0 = sound surface)."""
    rows = [",".join(str(int(v)) for v in row) for row in truth.label_map]
    atomic_write_text(path, "\n".join(rows) + "\n")


def load_truth(path) -> GroundTruth:
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise RasterParseError(
                f"row {lineno} has {len(cells)} columns, expected {width}"
            )
        try:
            rows.append([int(cell) for cell in cells])
        except ValueError:
            raise RasterParseError(
                f"row {lineno}: labels must be integers"
            ) from None
    if not rows:
        raise RasterParseError("empty label file")
    labels = np.array(rows, dtype=np.int32)
    if labels.min() < 0:
        raise RasterParseError("labels must be >= 0")
    return GroundTruth(labels)
