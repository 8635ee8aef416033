"""Command-line surface: synthesis, rectification, flows, metrics, rendering.

Exit codes: 0 success, 1 usage error, 2 runtime failure. All behavior is
flag-driven; there are no config files, so dataset manifests remain the single
source of reproducibility truth.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .dataio import (
    load_image,
    load_mask,
    read_flow,
    read_manifest,
    save_image,
    save_mask,
    write_flow,
)
from .errors import BarrelWarpError
from .geometry import CoefficientRanges, DistortionParams, Intrinsics
from .metrics import epe, psnr, sharpness, ssim
from .pipeline import (
    SynthesisConfig,
    compare_synthesis_modes,
    generate_dataset,
    oracle_rectify,
    params_from_record,
)
from .warp import fill_scale, gt_backward_flow
from . import dataio


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, help on stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_range_flags(parser):
    parser.add_argument("--k1-range", nargs=2, type=float, default=[0.0, 0.5], metavar=("LO", "HI"))
    parser.add_argument("--k2-range", nargs=2, type=float, default=[-0.05, 0.05], metavar=("LO", "HI"))
    parser.add_argument("--k3-range", nargs=2, type=float, default=[-0.05, 0.05], metavar=("LO", "HI"))
    parser.add_argument("--k4-range", nargs=2, type=float, default=[-0.05, 0.05], metavar=("LO", "HI"))


def _ranges_from_args(args) -> CoefficientRanges:
    return CoefficientRanges(
        k1=tuple(args.k1_range),
        k2=tuple(args.k2_range),
        k3=tuple(args.k3_range),
        k4=tuple(args.k4_range),
    )


def _add_synthesis_flags(parser):
    parser.add_argument("--input", required=True, help="directory of source images")
    parser.add_argument("--output", required=True, help="output dataset directory")
    parser.add_argument("--size", type=int, default=256, help="square target resolution")
    _add_range_flags(parser)
    parser.add_argument("--focal-ratio", type=float, default=0.8, help="focal length / frame side")
    parser.add_argument("--mode", choices=["forward", "inverse"], default="forward")
    parser.add_argument("--fill", choices=["corner", "none"], default="corner")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--count", type=int, default=None, help="limit number of images")
    parser.add_argument("--threads", type=int, default=1)


def _config_from_args(args) -> SynthesisConfig:
    return SynthesisConfig(
        input_dir=args.input,
        output_dir=args.output,
        target_size=args.size,
        ranges=_ranges_from_args(args),
        focal_ratio=args.focal_ratio,
        mode="inverse_model" if args.mode == "inverse" else "forward",
        fill=args.fill,
        base_seed=args.seed,
        count=args.count,
        threads=args.threads,
    )


def _params_from_flags(args, width: int, height: int) -> DistortionParams:
    intr = Intrinsics(f=args.focal, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0)
    params = DistortionParams(k=(args.k1, args.k2, args.k3, args.k4), intr=intr, s=1.0)
    if args.fill_scale is not None:
        return replace(params, s=args.fill_scale)
    if args.fill == "corner":
        return replace(params, s=fill_scale(params, width, height))
    return params


def build_parser() -> _Parser:
    parser = _Parser(prog="barrelwarp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", parents=[], help="generate a distorted dataset")
    _add_synthesis_flags(p)

    p = sub.add_parser("rectify", help="rectify one image with known coefficients")
    p.add_argument("--image", required=True)
    p.add_argument("--k1", type=float, required=True)
    p.add_argument("--k2", type=float, default=0.0)
    p.add_argument("--k3", type=float, default=0.0)
    p.add_argument("--k4", type=float, default=0.0)
    p.add_argument("--focal", type=float, required=True, help="focal length in pixels")
    p.add_argument("--fill", choices=["corner", "none"], default="corner")
    p.add_argument("--fill-scale", type=float, default=None, help="explicit fill scale")
    p.add_argument("--out", required=True)
    p.add_argument("--mask-out", default=None)

    p = sub.add_parser("flow", help="write an analytic backward flow file")
    p.add_argument("--params-from", default=None, help="manifest to take parameters from")
    p.add_argument("--index", type=int, default=0, help="record index in the manifest")
    p.add_argument("--k1", type=float, default=None)
    p.add_argument("--k2", type=float, default=0.0)
    p.add_argument("--k3", type=float, default=0.0)
    p.add_argument("--k4", type=float, default=0.0)
    p.add_argument("--focal", type=float, default=None)
    p.add_argument("--fill", choices=["corner", "none"], default="corner")
    p.add_argument("--fill-scale", type=float, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--out", required=True, help="output .fdbw path")

    p = sub.add_parser("metrics", help="score an image pair (and optional flows)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--flow-a", default=None)
    p.add_argument("--flow-b", default=None)
    p.add_argument("--mask", default=None)

    p = sub.add_parser("viz-flow", help="render a flow file with the color wheel")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-mag", type=float, default=None)

    p = sub.add_parser("compare-modes", help="ablate the two synthesis modes")
    p.add_argument("--input", required=True)
    p.add_argument("--size", type=int, default=256)
    _add_range_flags(p)
    p.add_argument("--focal-ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None)

    return parser


def _cmd_synthesize(args) -> int:
    records = generate_dataset(_config_from_args(args))
    print(f"wrote {len(records)} records to {args.output}", file=sys.stderr)
    return 0


def _cmd_rectify(args) -> int:
    img = load_image(args.image)
    params = _params_from_flags(args, img.width, img.height)
    rectified, mask = oracle_rectify(img, params)
    save_image(rectified, args.out)
    if args.mask_out:
        save_mask(mask, args.mask_out)
    return 0


def _cmd_flow(args) -> int:
    if args.params_from is not None:
        records = read_manifest(args.params_from)
        if not 0 <= args.index < len(records):
            raise BarrelWarpError(
                f"record index {args.index} outside manifest of {len(records)}"
            )
        record = records[args.index]
        params = params_from_record(record)
        width, height = args.width, args.height
        if width is None or height is None:
            stored = read_flow(Path(args.params_from).parent / record.flow_path)
            width, height = stored.width, stored.height
    else:
        if args.k1 is None or args.focal is None or args.width is None or args.height is None:
            raise BarrelWarpError(
                "flow needs either --params-from or all of --k1/--focal/--width/--height"
            )
        width, height = args.width, args.height
        params = _params_from_flags(args, width, height)
    write_flow(gt_backward_flow(params, width, height), args.out)
    return 0


def _cmd_metrics(args) -> int:
    a = load_image(args.a)
    b = load_image(args.b)
    mask = load_mask(args.mask) if args.mask else None
    out = {
        "a": args.a,
        "b": args.b,
        "psnr": psnr(a, b, mask),
        "ssim": ssim(a, b),
        "sharpness": sharpness(a),
    }
    if args.flow_a and args.flow_b:
        out["epe"] = epe(read_flow(args.flow_a), read_flow(args.flow_b), mask)
    print(json.dumps(out))
    return 0


def _cmd_viz_flow(args) -> int:
    flow = read_flow(args.infile)
    save_image(dataio.flow_to_color(flow, args.max_mag), args.out)
    return 0


def _cmd_compare_modes(args) -> int:
    cfg = SynthesisConfig(
        input_dir=args.input,
        output_dir=".",  # unused by the comparison
        target_size=args.size,
        ranges=_ranges_from_args(args),
        focal_ratio=args.focal_ratio,
        base_seed=args.seed,
        count=args.count,
    )
    print(json.dumps(compare_synthesis_modes(cfg)))
    return 0


_COMMANDS = {
    "synthesize": _cmd_synthesize,
    "rectify": _cmd_rectify,
    "flow": _cmd_flow,
    "metrics": _cmd_metrics,
    "viz-flow": _cmd_viz_flow,
    "compare-modes": _cmd_compare_modes,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (BarrelWarpError, OSError, ValueError) as exc:
        print(f"barrelwarp: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
