"""Batch front end: segment, maxima, baseline, synth, sweep, eval.

Every command reads local files named by flags, writes its artifacts
atomically, and never touches the network or a clock, so identical
invocations produce byte-identical outputs. Failures print one
stage-labeled diagnostic and exit 1; usage problems exit 2.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .baselines import ThresholdSpec, kmeans_temperature_segment, threshold_segment
from .config import (
    PipelineConfig,
    apply_config_values,
    format_config,
    parse_config,
    with_io,
)
from .discrimination import segment
from .errors import StageError, ThermosegError
from .evaluation import iou, per_blob_iou, save_sweep_csv, step_size_sweep
from .extraction import extract_maxima_sequence
from .io import atomic_write_text, load_mask, load_raster, save_mask, save_raster
from .smoothing import diffuse
from .synth import generate_scene, load_truth, parse_scene_spec, save_truth


def _run_step(stage: str, fn):
    try:
        return fn()
    except StageError:
        raise
    except (ThermosegError, OSError) as exc:
        raise StageError(stage, str(exc)) from exc


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--input", help="input raster path")
    common.add_argument("--output", help="output path")
    common.add_argument("--format", choices=("csv", "f32", "pgm16"),
                        help="raster format (default: by extension)")
    common.add_argument("--report", help="report path (default: derived from output)")
    common.add_argument("--h-in", type=float, dest="h_in", help="initial dome offset")
    common.add_argument("--delta", type=float, help="offset step size")
    common.add_argument("--sigma", type=float, help="Gaussian scale for smoothing/gradient")
    common.add_argument("--min-area", type=int, dest="min_area",
                        help="reference component minimum area")
    common.add_argument("--exclusion-mask", dest="exclusion_mask",
                        help="mask file of pixels to exclude")
    common.add_argument("--bands", help="screening bands as MEAN_HALF,CV_LOW,CV_HIGH")
    common.add_argument("--connectivity", type=int, choices=(4, 8),
                        help="pixel adjacency")

    parser = argparse.ArgumentParser(
        prog="thermoseg",
        description="Thermal-raster defect segmentation via regularized "
        "morphological reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("segment", parents=[common],
                   help="full pipeline: smooth, extract, screen, write mask + report")
    sub.add_parser("maxima", parents=[common],
                   help="extraction only: write the union of dome supports")

    p_base = sub.add_parser("baseline", parents=[common],
                            help="threshold / percentile / k-means segmenters")
    p_base.add_argument("--method", required=True,
                        choices=("threshold", "percentile", "kmeans"))
    p_base.add_argument("--value", type=float,
                        help="absolute threshold or percentile value")
    p_base.add_argument("--k", type=int, default=2, help="cluster count for kmeans")
    p_base.add_argument("--nighttime", action="store_true",
                        help="drop the highest-mean cluster instead of the lowest")

    p_synth = sub.add_parser("synth", parents=[common],
                             help="render a synthetic scene + ground truth")
    p_synth.add_argument("--spec", required=True, help="scene spec file")
    p_synth.add_argument("--seed", type=int, help="override the spec seed")
    p_synth.add_argument("--truth", help="ground-truth label CSV path")

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="step-size sweep table")
    p_sweep.add_argument("--deltas", required=True,
                         help="comma-separated step sizes (must include 0.05)")

    p_eval = sub.add_parser("eval", parents=[common],
                            help="IoU of a mask against ground-truth labels")
    p_eval.add_argument("--truth", required=True, help="ground-truth label CSV path")
    return parser


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.defaults()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read(), base=cfg)
    overrides = {}
    if args.input is not None:
        overrides["input"] = args.input
    if args.output is not None:
        overrides["output"] = args.output
    if args.format is not None:
        overrides["format"] = args.format
    if getattr(args, "report", None) is not None:
        overrides["report"] = args.report
    if args.h_in is not None:
        overrides["extraction.h_in"] = args.h_in
    if args.delta is not None:
        overrides["extraction.delta"] = args.delta
    if args.sigma is not None:
        overrides["diffusion.sigma"] = args.sigma
    if args.min_area is not None:
        overrides["ref.min_area"] = args.min_area
    if args.exclusion_mask is not None:
        overrides["ref.exclusion_mask"] = args.exclusion_mask
    if args.connectivity is not None:
        overrides["extraction.connectivity"] = args.connectivity
    if args.bands is not None:
        parts = args.bands.split(",")
        if len(parts) != 3:
            raise StageError("config", f"--bands needs 3 comma-separated values, got {args.bands!r}")
        try:
            half, lo, hi = (float(p) for p in parts)
        except ValueError:
            raise StageError("config", f"--bands values must be numbers, got {args.bands!r}") from None
        overrides["bands.mean_halfwidth"] = half
        overrides["bands.cv_low"] = lo
        overrides["bands.cv_high"] = hi
    return _run_step("config", lambda: apply_config_values(cfg, overrides))


def _require(cfg_value, flag: str):
    if cfg_value is None:
        raise StageError("config", f"missing required {flag} (flag or config key)")
    return cfg_value


def _derived_report_path(output: str) -> str:
    p = Path(output)
    return str(p.with_name(p.stem + ".report.kv"))


def _cmd_segment(args) -> int:
    cfg = _load_config(args)
    input_path = _require(cfg.input, "--input")
    output_path = _require(cfg.output, "--output")
    report_path = cfg.report or _derived_report_path(output_path)
    cfg = with_io(cfg, input=input_path, output=output_path, report=report_path)

    raster = _run_step("io", lambda: load_raster(input_path, cfg.format))
    mask, report = segment(raster, cfg)
    _run_step("io", lambda: save_mask(mask, output_path))
    _run_step("io", lambda: atomic_write_text(report_path, report.to_kv()))
    print(f"wrote {output_path} ({mask.area} px) and {report_path}")
    return 0


def _cmd_maxima(args) -> int:
    cfg = _load_config(args)
    input_path = _require(cfg.input, "--input")
    output_path = _require(cfg.output, "--output")
    report_path = cfg.report or _derived_report_path(output_path)
    cfg = with_io(cfg, input=input_path, output=output_path, report=report_path)

    raster = _run_step("io", lambda: load_raster(input_path, cfg.format))
    t_s = _run_step("smoothing", lambda: diffuse(raster, cfg.diffusion))
    sequence = _run_step(
        "extraction", lambda: extract_maxima_sequence(t_s, cfg.extraction)
    )
    union = sequence.support_union()

    lines = [line for line in format_config(cfg).splitlines() if line.strip()]
    lines.append(f"report.stop_cause={sequence.stop_cause}")
    lines.append(f"report.max_steps={sequence.max_steps_allowed}")
    lines.append(f"report.steps={len(sequence.entries)}")
    for entry in sequence.entries:
        prefix = f"report.step.{entry.step}"
        lines.append(f"{prefix}.offset={entry.offset!r}")
        lines.append(f"{prefix}.regions={len(entry.regions)}")
        lines.append(f"{prefix}.support_area={entry.regions.total_area}")
    lines.append(f"report.support_union_area={union.area}")

    _run_step("io", lambda: save_mask(union, output_path))
    _run_step("io", lambda: atomic_write_text(report_path, "\n".join(lines) + "\n"))
    print(f"wrote {output_path} ({union.area} px) and {report_path}")
    return 0


def _cmd_baseline(args) -> int:
    cfg = _load_config(args)
    input_path = _require(cfg.input, "--input")
    output_path = _require(cfg.output, "--output")
    raster = _run_step("io", lambda: load_raster(input_path, cfg.format))

    if args.method in ("threshold", "percentile"):
        if args.value is None:
            raise StageError("config", f"--method {args.method} requires --value")
        kind = "absolute" if args.method == "threshold" else "percentile"
        mask = _run_step(
            "baseline",
            lambda: threshold_segment(raster, ThresholdSpec(kind, args.value)),
        )
    else:
        mask = _run_step(
            "baseline",
            lambda: kmeans_temperature_segment(
                raster, args.k, daytime=not args.nighttime
            ),
        )
    _run_step("io", lambda: save_mask(mask, output_path))
    print(f"wrote {output_path} ({mask.area} px)")
    return 0


def _cmd_synth(args) -> int:
    cfg = _load_config(args)
    output_path = _require(cfg.output, "--output")

    def build_spec():
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = parse_scene_spec(fh.read())
        if args.seed is not None:
            spec = dataclasses.replace(spec, seed=args.seed)
        return spec

    spec = _run_step("spec", build_spec)
    raster, truth = _run_step("synth", lambda: generate_scene(spec))
    p = Path(output_path)
    truth_path = args.truth or str(p.with_name(p.stem + ".truth.csv"))
    _run_step("io", lambda: save_raster(raster, output_path, cfg.format))
    _run_step("io", lambda: save_truth(truth_path, truth))
    print(f"wrote {output_path} and {truth_path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    input_path = _require(cfg.input, "--input")
    output_path = _require(cfg.output, "--output")

    def parse_deltas():
        try:
            return [float(p) for p in args.deltas.split(",")]
        except ValueError:
            raise StageError(
                "config", f"--deltas must be comma-separated numbers, got {args.deltas!r}"
            ) from None

    deltas = parse_deltas()
    raster = _run_step("io", lambda: load_raster(input_path, cfg.format))
    t_s = _run_step("smoothing", lambda: diffuse(raster, cfg.diffusion))
    rows = _run_step("sweep", lambda: step_size_sweep(t_s, cfg.extraction, deltas))
    _run_step("io", lambda: save_sweep_csv(output_path, rows))
    print(f"wrote {output_path} ({len(rows)} rows)")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args)
    input_path = _require(cfg.input, "--input")
    mask = _run_step("io", lambda: load_mask(input_path, None))
    truth = _run_step("io", lambda: load_truth(args.truth))

    overall = _run_step("eval", lambda: iou(mask, truth.defect_mask()))
    per_blob = _run_step("eval", lambda: per_blob_iou(mask, truth))
    lines = [f"iou={overall!r}"]
    for blob_id in sorted(per_blob):
        lines.append(f"blob.{blob_id}.iou={per_blob[blob_id]!r}")
    text = "\n".join(lines) + "\n"
    if cfg.output:
        _run_step("io", lambda: atomic_write_text(cfg.output, text))
        print(f"wrote {cfg.output}")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "segment": _cmd_segment,
    "maxima": _cmd_maxima,
    "baseline": _cmd_baseline,
    "synth": _cmd_synth,
    "sweep": _cmd_sweep,
    "eval": _cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ThermosegError as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
