"""Build the frontend test fixtures with the primary barrelwarp package.

Produces, under frontend/tests/fixtures/:

  dataset64/          20-sample toy dataset (PNG + .fdbw + manifest) at 64^2
  warp_fixture.json   small image + flow + expected backward-warp output
  metrics_fixture.json image/flow pairs with reference PSNR/SSIM/EPE values

Run from anywhere: python3 frontend/scripts/make_fixtures.py
"""

import io
import json
import sys
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from barrelwarp.dataio import read_flow, read_manifest
from barrelwarp.geometry import CoefficientRanges, DistortionParams, Intrinsics
from barrelwarp.metrics import epe, psnr, ssim
from barrelwarp.pipeline import SynthesisConfig, generate_dataset, ingest_image
from barrelwarp.warp import (
    FlowField,
    ImageBuffer,
    apply_backward_flow,
    fill_scale,
    gt_backward_flow,
)

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

PHOTO_NAMES = [
    "astronaut", "brick", "camera", "cat", "chelsea", "coffee", "coins",
    "gravel", "hubble_deep_field", "immunohistochemistry", "moon", "page",
    "rocket",
]


def export_photos(root: Path, count: int) -> None:
    import skimage.data

    root.mkdir(parents=True, exist_ok=True)
    variants = []
    for name in PHOTO_NAMES:
        arr = getattr(skimage.data, name)()
        if arr.ndim == 2:
            arr = np.repeat(arr[..., None], 3, axis=2)
        variants.append((name, arr[..., :3]))
    # horizontal flips of the first photos make up the remainder
    for name, arr in list(variants):
        if len(variants) >= count:
            break
        variants.append((f"{name}_flip", arr[:, ::-1]))
    for name, arr in variants[:count]:
        Image.fromarray(np.ascontiguousarray(arr), mode="RGB").save(root / f"{name}.png")


def build_dataset() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        photos = Path(tmp) / "photos"
        export_photos(photos, 20)
        cfg = SynthesisConfig(
            input_dir=str(photos),
            output_dir=str(FIXTURES / "dataset64"),
            target_size=64,
            ranges=CoefficientRanges(
                k1=(0.0, 0.25), k2=(-0.02, 0.02), k3=(-0.02, 0.02), k4=(-0.02, 0.02)
            ),
            base_seed=0,
            count=20,
        )
        records = generate_dataset(cfg, log=io.StringIO())
        print(f"dataset64: {len(records)} records")


def floats(arr) -> list:
    return [float(v) for v in np.asarray(arr, dtype=np.float32).reshape(-1)]


def build_warp_fixture() -> None:
    root = FIXTURES / "dataset64"
    record = read_manifest(root / "manifest.jsonl")[0]
    gt = ingest_image(root / record.gt_path, 64)
    patch = ImageBuffer(gt.data[8:24, 10:26])

    size = 16
    intr = Intrinsics(f=14.0, cx=(size - 1) / 2, cy=(size - 1) / 2)
    params = DistortionParams(k=(0.2, 0.0, 0.0, 0.0), intr=intr, s=1.0)
    params = DistortionParams(k=params.k, intr=intr, s=fill_scale(params, size, size))
    flow = gt_backward_flow(params, size, size)
    warped, mask = apply_backward_flow(patch, flow)

    payload = {
        "width": size,
        "height": size,
        "image": floats(patch.data),
        "flow": floats(flow.data),
        "expected": floats(warped.data),
        "mask": [bool(v) for v in mask.reshape(-1)],
    }
    (FIXTURES / "warp_fixture.json").write_text(json.dumps(payload))
    print("warp_fixture.json written")


def build_metrics_fixture() -> None:
    root = FIXTURES / "dataset64"
    records = read_manifest(root / "manifest.jsonl")
    a = ingest_image(root / records[0].distorted_path, 64)
    b = ingest_image(root / records[0].gt_path, 64)
    flow_a = read_flow(root / records[0].flow_path)
    flow_b = read_flow(root / records[1].flow_path)
    payload = {
        "image_a": records[0].distorted_path,
        "image_b": records[0].gt_path,
        "flow_a": records[0].flow_path,
        "flow_b": records[1].flow_path,
        "psnr": psnr(a, b),
        "ssim": ssim(a, b),
        "epe": epe(flow_a, flow_b),
        "pixel_probe": {
            "x": 13,
            "y": 7,
            "rgb": floats(a.data[7, 13]),
        },
        "flow_probe": {
            "x": 50,
            "y": 9,
            "duv": floats(flow_a.data[9, 50]),
        },
    }
    (FIXTURES / "metrics_fixture.json").write_text(json.dumps(payload))
    print("metrics_fixture.json written")


if __name__ == "__main__":
    FIXTURES.mkdir(parents=True, exist_ok=True)
    build_dataset()
    build_warp_fixture()
    build_metrics_fixture()
    print(f"fixtures under {FIXTURES}")
