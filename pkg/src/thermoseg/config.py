"""Plain-text key=value configuration for the pipeline and CLI.

Grammar: one `key=value` per line; blank lines and lines starting with
`#` are ignored; whitespace around key and value is stripped; keys use
dotted section prefixes. Keys under `report.` are skipped on parse so a
report file doubles as a config file for exact re-runs. Unknown keys are
errors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .discrimination import RefParams, ScreeningBands
from .errors import ParameterError
from .extraction import ExtractionConfig, StabilityParams
from .morphology import CROSS3, SQUARE3, MorphSettings, StructuringElement
from .smoothing import DiffusionParams

_SE_NAMES = {"square3": SQUARE3, "cross3": CROSS3}


def _se_name(se: StructuringElement) -> str:
    for name, known in _SE_NAMES.items():
        if se.footprint().shape == known.footprint().shape and (
            se.footprint() == known.footprint()
        ).all():
            return name
    raise ParameterError("cannot serialize a custom structuring element")


@dataclass(frozen=True)
class PipelineConfig:
    """Fully-resolved pipeline settings plus optional io bindings.

    exclusion_path records where ref.exclusion_mask was loaded from so the
    config can be written back out; a mask set programmatically without a
    path is dropped on serialization.
    """

    diffusion: DiffusionParams
    extraction: ExtractionConfig
    ref: RefParams
    bands: ScreeningBands
    exclusion_path: str | None = None
    input: str | None = None
    output: str | None = None
    format: str | None = None
    report: str | None = None

    @classmethod
    def defaults(cls) -> "PipelineConfig":
        return cls(
            diffusion=DiffusionParams(),
            extraction=ExtractionConfig(),
            ref=RefParams(),
            bands=ScreeningBands(),
        )


def format_config(cfg: PipelineConfig) -> str:
    """Canonical text form; parse_config(format_config(cfg)) round-trips."""
    lines = []
    for key, path in (
        ("input", cfg.input),
        ("output", cfg.output),
        ("format", cfg.format),
        ("report", cfg.report),
    ):
        if path is not None:
            lines.append(f"{key}={path}")
    d = cfg.diffusion
    lines.append(f"diffusion.sigma={d.sigma!r}")
    lines.append(f"diffusion.kappa={'auto' if d.kappa is None else repr(d.kappa)}")
    lines.append(f"diffusion.tau={d.tau!r}")
    lines.append(f"diffusion.iterations={d.iterations}")
    e = cfg.extraction
    lines.append(f"extraction.h_in={e.h_in!r}")
    lines.append(f"extraction.delta={e.delta!r}")
    lines.append(f"extraction.se={_se_name(e.morph.se)}")
    lines.append(f"extraction.plateau_eps={e.morph.plateau_eps!r}")
    lines.append(f"extraction.connectivity={e.connectivity}")
    ms = e.max_steps_override
    lines.append(f"extraction.max_steps={'auto' if ms is None else ms}")
    lines.append(f"stability.q_threshold={e.stability.q_threshold!r}")
    lines.append(f"stability.patience={e.stability.patience}")
    lines.append(f"ref.min_area={cfg.ref.min_area}")
    if cfg.exclusion_path is not None:
        lines.append(f"ref.exclusion_mask={cfg.exclusion_path}")
    b = cfg.bands
    lines.append(f"bands.mean_halfwidth={b.mean_halfwidth_factor!r}")
    lines.append(f"bands.cv_low={b.cv_low_factor!r}")
    lines.append(f"bands.cv_high={b.cv_high_factor!r}")
    return "\n".join(lines) + "\n"


def parse_kv_lines(text: str, kind: str = "config") -> dict[str, str]:
    """Shared key=value line parser; last assignment of a key wins."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParameterError(
                f"{kind} line {lineno}: expected key=value, got {line!r}"
            )
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def _to_float(key, value):
    try:
        out = float(value)
    except ValueError:
        raise ParameterError(f"config key {key}: invalid number {value!r}") from None
    return out


def _to_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ParameterError(f"config key {key}: invalid integer {value!r}") from None


def _to_se(key, value):
    if value not in _SE_NAMES:
        raise ParameterError(
            f"config key {key}: unknown structuring element {value!r} "
            f"(expected one of {sorted(_SE_NAMES)})"
        )
    return _SE_NAMES[value]


def _opt(converter):
    return lambda key, value: None if value == "auto" else converter(key, value)


_CONVERTERS = {
    "input": lambda k, v: v,
    "output": lambda k, v: v,
    "format": lambda k, v: v,
    "report": lambda k, v: v,
    "diffusion.sigma": _to_float,
    "diffusion.kappa": _opt(_to_float),
    "diffusion.tau": _to_float,
    "diffusion.iterations": _to_int,
    "extraction.h_in": _to_float,
    "extraction.delta": _to_float,
    "extraction.se": _to_se,
    "extraction.plateau_eps": _to_float,
    "extraction.connectivity": _to_int,
    "extraction.max_steps": _opt(_to_int),
    "stability.q_threshold": _to_float,
    "stability.patience": _to_int,
    "ref.min_area": _to_int,
    "ref.exclusion_mask": lambda k, v: v,
    "bands.mean_halfwidth": _to_float,
    "bands.cv_low": _to_float,
    "bands.cv_high": _to_float,
}


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse config text, applying assignments over `base` (or defaults)."""
    raw = parse_kv_lines(text)
    values = {}
    for key, value in raw.items():
        if key.startswith("report."):
            continue
        if key not in _CONVERTERS:
            raise ParameterError(f"unknown config key {key!r}")
        values[key] = _CONVERTERS[key](key, value)
    return apply_config_values(base or PipelineConfig.defaults(), values)


def apply_config_values(base: PipelineConfig, values: dict) -> PipelineConfig:
    """Rebuild a PipelineConfig with dotted-key assignments applied."""

    def pick(key, fallback):
        return values[key] if key in values else fallback

    diffusion = DiffusionParams(
        sigma=pick("diffusion.sigma", base.diffusion.sigma),
        kappa=pick("diffusion.kappa", base.diffusion.kappa),
        tau=pick("diffusion.tau", base.diffusion.tau),
        iterations=pick("diffusion.iterations", base.diffusion.iterations),
    )
    morph = MorphSettings(
        se=pick("extraction.se", base.extraction.morph.se),
        plateau_eps=pick("extraction.plateau_eps", base.extraction.morph.plateau_eps),
    )
    stability = StabilityParams(
        q_threshold=pick("stability.q_threshold", base.extraction.stability.q_threshold),
        patience=pick("stability.patience", base.extraction.stability.patience),
    )
    extraction = ExtractionConfig(
        h_in=pick("extraction.h_in", base.extraction.h_in),
        delta=pick("extraction.delta", base.extraction.delta),
        morph=morph,
        connectivity=pick("extraction.connectivity", base.extraction.connectivity),
        stability=stability,
        max_steps_override=pick("extraction.max_steps", base.extraction.max_steps_override),
    )

    exclusion_path = pick("ref.exclusion_mask", base.exclusion_path)
    exclusion_mask = base.ref.exclusion_mask
    if "ref.exclusion_mask" in values:
        from .io import load_mask  # io is independent of config; local to keep startup light

        exclusion_mask = load_mask(values["ref.exclusion_mask"])
    ref = RefParams(
        min_area=pick("ref.min_area", base.ref.min_area),
        exclusion_mask=exclusion_mask,
    )
    bands = ScreeningBands(
        mean_halfwidth_factor=pick("bands.mean_halfwidth", base.bands.mean_halfwidth_factor),
        cv_low_factor=pick("bands.cv_low", base.bands.cv_low_factor),
        cv_high_factor=pick("bands.cv_high", base.bands.cv_high_factor),
    )
    return PipelineConfig(
        diffusion=diffusion,
        extraction=extraction,
        ref=ref,
        bands=bands,
        exclusion_path=exclusion_path,
        input=pick("input", base.input),
        output=pick("output", base.output),
        format=pick("format", base.format),
        report=pick("report", base.report),
    )


def with_io(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    """Convenience for rebinding io paths without touching parameters."""
    return replace(cfg, **kwargs)
