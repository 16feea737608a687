"""Command-line front end.

Subcommands: enhance (the full pipeline), baseline (plain weighted-histogram
gamma for comparison), curve (export the designed tone curve as CSV),
decompose (dump illumination/reflectance as PGM), eval (noise robustness
benchmark on synthetic scenes).

Exit codes: 0 success, 1 usage/config/input errors, 2 solver failure.
Errors go to stderr as one line: "shadowup: error: <code>: <message>".
Parameter precedence is defaults, then --config file, then flags.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curve import export_curve
from .decompose import decompose
from .errors import ConvergenceError, ImageIOError, InvalidInputError, ShadowUpError
from .image import ColorSpace, PlanarImage, load_image, rgb_to_hsv, save_image
from .noise import export_histogram
from .pipeline import (
    BaselineMode,
    EnhanceConfig,
    enhance_batch,
    enhance_stages,
    hsv_to_rgb,
)
from .synth import run_noise_benchmark, write_benchmark_csv

DEFAULTS = {
    "percentile": 75.0,
    "alpha": 0.5,
    "lambda": 0.5,
    "sigma": 3.0,
    "noise_a": 0.01,
    "noise_b": 0.0004,
    "tolerance": 1e-5,
    "max_iters": 500,
}

_PARAM_TYPES = {
    "percentile": float,
    "alpha": float,
    "lambda": float,
    "sigma": float,
    "noise_a": float,
    "noise_b": float,
    "tolerance": float,
    "max_iters": int,
}


class UsageError(ShadowUpError):
    def __init__(self, message: str, usage: str):
        self.usage = usage
        super().__init__(message)


class ConfigFileError(ShadowUpError):
    pass


@dataclass
class CliInvocation:
    """One fully resolved command: subcommand, paths, merged parameters."""

    subcommand: str
    inputs: tuple
    output: str | None
    params: dict = field(default_factory=dict)
    workers: int = 1
    report: bool = False
    dump_layers: bool = False
    dump_histogram: bool = False
    baseline: bool = False
    noise_std: float = 0.05
    seeds: int = 20
    size: int = 128


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through UsageError for exit 1.
    def error(self, message):
        raise UsageError(message, self.format_usage())


def _add_param_flags(parser):
    opts = dict(default=argparse.SUPPRESS)
    parser.add_argument(
        "--percentile", type=float, metavar="P",
        help="bright-tail percentile for the shadow threshold (default: 75)", **opts,
    )
    parser.add_argument(
        "--alpha", type=float, metavar="A",
        help="histogram compression strength in [0, 1] (default: 0.5)", **opts,
    )
    parser.add_argument(
        "--lambda", type=float, metavar="L", dest="lambda",
        help="illumination smoothing strength (default: 0.5)", **opts,
    )
    parser.add_argument(
        "--sigma", type=float, metavar="S",
        help="local contrast window scale in pixels (default: 3.0)", **opts,
    )
    parser.add_argument(
        "--noise-a", type=float, metavar="A",
        help="signal-dependent noise variance slope (default: 0.01)", **opts,
    )
    parser.add_argument(
        "--noise-b", type=float, metavar="B",
        help="noise variance floor (default: 0.0004)", **opts,
    )
    parser.add_argument(
        "--tolerance", type=float, metavar="T",
        help="solver relative residual target (default: 1e-5)", **opts,
    )
    parser.add_argument(
        "--max-iters", type=int, metavar="N",
        help="solver iteration budget (default: 500)", **opts,
    )
    parser.add_argument(
        "--config", metavar="FILE", default=None,
        help="flat key=value file applied between defaults and flags",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shadowup", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    enhance_p = sub.add_parser("enhance", help="enhance shadows in one or more images")
    enhance_p.add_argument("inputs", nargs="+", metavar="IMAGE")
    enhance_p.add_argument("-o", "--output", metavar="PATH",
                           help="output file, or directory when given several inputs")
    enhance_p.add_argument("--workers", type=int, default=1, metavar="N",
                           help="concurrent images in batch mode (default: 1)")
    enhance_p.add_argument("--report", action="store_true",
                           help="write a JSON run report next to each output")
    enhance_p.add_argument("--dump-layers", action="store_true",
                           help="also write illumination/reflectance PGM files")
    enhance_p.add_argument("--dump-histogram", action="store_true",
                           help="also write the gated histogram as a 256-row CSV")
    enhance_p.add_argument("--baseline", action="store_true",
                           help="run the ungated reference method instead")
    _add_param_flags(enhance_p)

    baseline_p = sub.add_parser("baseline", help="run only the ungated reference method")
    baseline_p.add_argument("inputs", nargs="+", metavar="IMAGE")
    baseline_p.add_argument("-o", "--output", metavar="PATH")
    baseline_p.add_argument("--workers", type=int, default=1, metavar="N",
                            help="concurrent images in batch mode (default: 1)")
    baseline_p.add_argument("--report", action="store_true",
                            help="write a JSON run report next to each output")
    _add_param_flags(baseline_p)

    curve_p = sub.add_parser("curve", help="export the designed tone curve as CSV")
    curve_p.add_argument("inputs", nargs=1, metavar="IMAGE")
    curve_p.add_argument("-o", "--output", metavar="CSV")
    _add_param_flags(curve_p)

    decompose_p = sub.add_parser("decompose",
                                 help="write illumination/reflectance PGM planes")
    decompose_p.add_argument("inputs", nargs=1, metavar="IMAGE")
    decompose_p.add_argument("-o", "--output", metavar="BASE",
                             help="base path for the two PGM files")
    _add_param_flags(decompose_p)

    eval_p = sub.add_parser("eval", help="noise robustness benchmark on synthetic scenes")
    eval_p.add_argument("-o", "--output", metavar="CSV",
                        help="benchmark table destination (default: benchmark.csv)")
    eval_p.add_argument("--noise-std", type=float, default=0.05, metavar="S",
                        help="injected noise standard deviation (default: 0.05)")
    eval_p.add_argument("--seeds", type=int, default=20, metavar="N",
                        help="number of random seeds (default: 20)")
    eval_p.add_argument("--size", type=int, default=128, metavar="N",
                        help="synthetic scene side length (default: 128)")
    _add_param_flags(eval_p)
    return parser


def load_config_file(path) -> dict:
    """Parse a flat key=value parameter file; '#' starts a comment line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(f"{path}: cannot read: {exc.strerror or exc}") from exc
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigFileError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key = key.strip().replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigFileError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            overrides[key] = _PARAM_TYPES[key](value.strip())
        except ValueError:
            raise ConfigFileError(
                f"{path}:{lineno}: bad value for {key}: {value.strip()!r}"
            ) from None
    return overrides


def _resolve(namespace) -> CliInvocation:
    given = vars(namespace)
    params = dict(DEFAULTS)
    if given.get("config"):
        params.update(load_config_file(given["config"]))
    params.update({key: given[key] for key in DEFAULTS if key in given})
    return CliInvocation(
        subcommand=given["subcommand"],
        inputs=tuple(given.get("inputs") or ()),
        output=given.get("output"),
        params=params,
        workers=given.get("workers", 1),
        report=given.get("report", False),
        dump_layers=given.get("dump_layers", False),
        dump_histogram=given.get("dump_histogram", False),
        baseline=given.get("baseline", False) or given["subcommand"] == "baseline",
        noise_std=given.get("noise_std", 0.05),
        seeds=given.get("seeds", 20),
        size=given.get("size", 128),
    )


def _build_config(inv: CliInvocation) -> EnhanceConfig:
    p = inv.params
    mode = BaselineMode.AGCWD_PLAIN if inv.baseline else BaselineMode.PROPOSED
    return EnhanceConfig(
        percentile=p["percentile"],
        alpha=p["alpha"],
        lam=p["lambda"],
        sigma=p["sigma"],
        noise_a=p["noise_a"],
        noise_b=p["noise_b"],
        tolerance=p["tolerance"],
        max_iters=p["max_iters"],
        baseline_mode=mode,
    )


def _promote(image: PlanarImage) -> PlanarImage:
    if image.space is ColorSpace.GRAY:
        return PlanarImage(np.concatenate([image.planes] * 3), ColorSpace.RGB)
    return image


def _demote(image: PlanarImage) -> PlanarImage:
    return PlanarImage.from_gray(image.planes.max(axis=0))


def _derived_output(input_path: Path, out_dir) -> Path:
    name = f"{input_path.stem}_enhanced{input_path.suffix}"
    return (out_dir if out_dir is not None else input_path.parent) / name


def _write_layers(decomposition, out_path: Path) -> None:
    base = out_path.with_suffix("")
    save_image(
        PlanarImage.from_gray(decomposition.illumination),
        base.parent / f"{base.name}_illumination.pgm",
    )
    save_image(
        PlanarImage.from_gray(decomposition.reflectance),
        base.parent / f"{base.name}_reflectance.pgm",
    )


def _cmd_enhance(inv: CliInvocation) -> int:
    config = _build_config(inv)
    inputs = [Path(p) for p in inv.inputs]
    if len(inputs) > 1:
        out_dir = Path(inv.output) if inv.output else None
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
        out_paths = [_derived_output(p, out_dir) for p in inputs]
    elif inv.output:
        out_paths = [Path(inv.output)]
    else:
        out_paths = [_derived_output(inputs[0], None)]

    loaded = [load_image(p) for p in inputs]
    was_gray = [img.space is ColorSpace.GRAY for img in loaded]
    rgb_in = [_promote(img) for img in loaded]

    if inv.dump_layers or inv.dump_histogram:
        if config.baseline_mode is BaselineMode.AGCWD_PLAIN:
            raise InvalidInputError("--dump-layers/--dump-histogram need the full "
                                    "pipeline; they do nothing in baseline mode")
        results = []
        for img, out_path in zip(rgb_in, out_paths):
            stages = enhance_stages(rgb_to_hsv(img), config)
            if inv.dump_layers:
                _write_layers(stages.decomposition, out_path)
            if inv.dump_histogram:
                base = out_path.with_suffix("")
                export_histogram(stages.histogram,
                                 base.parent / f"{base.name}_histogram.csv")
            results.append((hsv_to_rgb(stages.hsv), stages.report))
    else:
        results = enhance_batch(rgb_in, config, workers=inv.workers)

    for (out_img, report), out_path, gray in zip(results, out_paths, was_gray):
        save_image(_demote(out_img) if gray else out_img, out_path)
        if inv.report:
            report_path = Path(str(out_path) + ".report.json")
            report_path.write_text(json.dumps(report.to_json(), indent=2) + "\n")
    return 0


def _cmd_curve(inv: CliInvocation) -> int:
    config = _build_config(inv)
    source = Path(inv.inputs[0])
    stages = enhance_stages(rgb_to_hsv(_promote(load_image(source))), config)
    if inv.output:
        out = Path(inv.output)
    else:
        out = source.parent / f"{source.stem}_curve.csv"
    export_curve(stages.curve, out)
    return 0


def _cmd_decompose(inv: CliInvocation) -> int:
    config = _build_config(inv)
    source = Path(inv.inputs[0])
    value = rgb_to_hsv(_promote(load_image(source))).planes[2]
    result = decompose(value, config.solver_config())
    _write_layers(result, Path(inv.output) if inv.output else source)
    return 0


def _cmd_eval(inv: CliInvocation) -> int:
    rows = run_noise_benchmark(
        noise_std=inv.noise_std,
        seeds=range(inv.seeds),
        size=inv.size,
        config=_build_config(inv),
    )
    write_benchmark_csv(rows, inv.output or "benchmark.csv")
    return 0


_HANDLERS = {
    "enhance": _cmd_enhance,
    "baseline": _cmd_enhance,
    "curve": _cmd_curve,
    "decompose": _cmd_decompose,
    "eval": _cmd_eval,
}


def _fail(code: str, message: str) -> None:
    sys.stderr.write(f"shadowup: error: {code}: {message}\n")


def run(argv=None) -> int:
    """Parse argv, execute one subcommand, and return the exit code."""
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        _fail("usage", str(exc))
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        invocation = _resolve(namespace)
        return _HANDLERS[invocation.subcommand](invocation)
    except ConfigFileError as exc:
        _fail("config", str(exc))
        return 1
    except ImageIOError as exc:
        _fail("io", str(exc))
        return 1
    except ConvergenceError as exc:
        _fail("convergence", str(exc))
        return 2
    except InvalidInputError as exc:
        _fail("invalid", str(exc))
        return 1
    except OSError as exc:
        _fail("io", str(exc))
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
