"""Subsurface-defect segmentation for single-band thermal rasters.

The pipeline smooths a raster with edge-preserving diffusion, pulls
candidate regions out as regularized h-dome supports over a rising offset
sweep, and keeps the regions whose boundary gradient statistics match a
reference population estimated from the gradient map itself. Baseline
segmenters, a deterministic scene generator, metrics, and a batch CLI
round out the toolkit.
"""

from .baselines import ThresholdSpec, kmeans_temperature_segment, threshold_segment
from .config import PipelineConfig, format_config, parse_config
from .discrimination import (
    RefParams,
    ReferenceStats,
    ScreenDecision,
    ScreeningBands,
    SegmentReport,
    reference_stats,
    screen_regions,
    segment,
    two_means_1d,
)
from .errors import (
    DegenerateInputError,
    NoReferenceError,
    ParameterError,
    PreconditionError,
    RasterParseError,
    StageError,
    ThermosegError,
)
from .evaluation import SweepRow, iou, per_blob_iou, step_size_sweep
from .extraction import (
    ExtractionConfig,
    MaximaSequence,
    SequenceEntry,
    StabilityParams,
    extract_maxima_sequence,
    max_steps,
    stability_score,
)
from .io import load_mask, load_raster, save_mask, save_raster
from .morphology import (
    CROSS3,
    SQUARE3,
    MorphSettings,
    StructuringElement,
    dilate,
    h_dome,
    reconstruct,
    reconstruct_naive,
    regional_maxima,
    regularized_marker,
)
from .raster import (
    BinaryMask,
    GradientRaster,
    Region,
    RegionSet,
    ThermalRaster,
    connected_components,
)
from .smoothing import DiffusionParams, diffuse, gradient_magnitude
from .synth import (
    Background,
    BlobSpec,
    GroundTruth,
    SceneSpec,
    format_scene_spec,
    generate_scene,
    load_truth,
    multipeak_signal,
    parse_scene_spec,
    save_truth,
)

__version__ = "0.1.0"

__all__ = [
    "Background",
    "BinaryMask",
    "BlobSpec",
    "CROSS3",
    "DegenerateInputError",
    "DiffusionParams",
    "ExtractionConfig",
    "GradientRaster",
    "GroundTruth",
    "MaximaSequence",
    "MorphSettings",
    "NoReferenceError",
    "ParameterError",
    "PipelineConfig",
    "PreconditionError",
    "RasterParseError",
    "RefParams",
    "ReferenceStats",
    "Region",
    "RegionSet",
    "SceneSpec",
    "ScreenDecision",
    "ScreeningBands",
    "SegmentReport",
    "SequenceEntry",
    "SQUARE3",
    "StabilityParams",
    "StageError",
    "StructuringElement",
    "SweepRow",
    "ThermalRaster",
    "ThermosegError",
    "ThresholdSpec",
    "connected_components",
    "diffuse",
    "dilate",
    "extract_maxima_sequence",
    "format_config",
    "format_scene_spec",
    "generate_scene",
    "gradient_magnitude",
    "h_dome",
    "iou",
    "kmeans_temperature_segment",
    "load_mask",
    "load_raster",
    "load_truth",
    "max_steps",
    "multipeak_signal",
    "parse_config",
    "parse_scene_spec",
    "per_blob_iou",
    "reconstruct",
    "reconstruct_naive",
    "reference_stats",
    "regional_maxima",
    "regularized_marker",
    "save_mask",
    "save_raster",
    "save_truth",
    "screen_regions",
    "segment",
    "stability_score",
    "step_size_sweep",
    "threshold_segment",
    "two_means_1d",
]
