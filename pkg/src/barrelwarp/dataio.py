"""File formats: flow containers, dataset manifests, PNG images, flow rendering.

Flow container (extension ``.fdbw``), byte-exact layout, little-endian:

    offset 0   magic bytes b"FDBW"
    offset 4   width  as uint32
    offset 8   height as uint32
    offset 12  row-major (du, dv) pairs as float32, height*width*2 values

Manifests are line-delimited JSON, UTF-8, one record per line; unknown fields
survive a read/write round trip, and record order is preserved.

Images cross the file boundary as 8-bit PNG. Loading divides by 255 exactly;
saving rounds half away from zero, so save(load(x)) reproduces any valid PNG
raster bit for bit. Grayscale rasters are replicated to three channels.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import BadMagic, IoFailure, ParseError, TruncatedFile, UnsupportedFormat
from .warp import FlowField, ImageBuffer

FLOW_MAGIC = b"FDBW"


def write_flow(flow: FlowField, path) -> None:
    header = struct.pack("<4sII", FLOW_MAGIC, flow.width, flow.height)
    payload = np.ascontiguousarray(flow.data, dtype="<f4").tobytes()
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise IoFailure(f"cannot write flow to {path}: {exc}") from exc


def read_flow(path) -> FlowField:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read flow from {path}: {exc}") from exc
    if len(raw) < 12:
        raise TruncatedFile(f"{path}: {len(raw)} bytes is shorter than the header")
    magic, width, height = struct.unpack_from("<4sII", raw, 0)
    if magic != FLOW_MAGIC:
        raise BadMagic(f"{path}: magic {magic!r} != {FLOW_MAGIC!r}")
    expected = 12 + width * height * 2 * 4
    if len(raw) < expected:
        raise TruncatedFile(f"{path}: {len(raw)} bytes, expected {expected}")
    data = np.frombuffer(raw, dtype="<f4", count=width * height * 2, offset=12)
    return FlowField(data.reshape(height, width, 2).copy())


@dataclass
class DatasetRecord:
    """One synthesized sample: artifact paths plus the generating parameters."""

    gt_path: str
    distorted_path: str
    flow_path: str
    mask_path: str
    k1: float
    k2: float
    k3: float
    k4: float
    f: float
    cx: float
    cy: float
    s: float
    mode: str
    seed: int
    k_inv: list | None = None
    extra: dict = field(default_factory=dict)

    _FIELDS = (
        "gt_path",
        "distorted_path",
        "flow_path",
        "mask_path",
        "k1",
        "k2",
        "k3",
        "k4",
        "f",
        "cx",
        "cy",
        "s",
        "mode",
        "seed",
        "k_inv",
    )

    def to_json_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self._FIELDS}
        if out["k_inv"] is None:
            del out["k_inv"]
        out.update(self.extra)
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DatasetRecord":
        known = {name: obj[name] for name in cls._FIELDS if name in obj}
        extra = {key: value for key, value in obj.items() if key not in cls._FIELDS}
        return cls(**known, extra=extra)


def write_manifest(records, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record.to_json_dict()) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write manifest to {path}: {exc}") from exc


def read_manifest(path) -> list[DatasetRecord]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read manifest from {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append(DatasetRecord.from_json_dict(obj))
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise ParseError(str(exc), line=lineno) from exc
    return records


def load_image(path) -> ImageBuffer:
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                arr = np.asarray(im, dtype=np.float32)
                arr = np.repeat(arr[..., None], 3, axis=2)
            elif im.mode == "RGB":
                arr = np.asarray(im, dtype=np.float32)
            elif im.mode in ("P", "RGBA", "LA", "I;16", "I", "1"):
                arr = np.asarray(im.convert("RGB"), dtype=np.float32)
            else:
                raise UnsupportedFormat(f"{path}: unsupported image mode {im.mode!r}")
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path}: not a readable image") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read image from {path}: {exc}") from exc
    return ImageBuffer(arr / np.float32(255.0))


def save_image(img: ImageBuffer, path) -> None:
    # round half away from zero; samples are nonnegative so floor(x + 0.5) does it
    quantized = np.floor(img.data.astype(np.float64) * 255.0 + 0.5)
    raster = np.clip(quantized, 0, 255).astype(np.uint8)
    try:
        Image.fromarray(raster, mode="RGB").save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write image to {path}: {exc}") from exc


def save_mask(mask: np.ndarray, path) -> None:
    try:
        Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(
            path, format="PNG"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write mask to {path}: {exc}") from exc


def load_mask(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"))
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path}: not a readable image") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read mask from {path}: {exc}") from exc
    return arr > 127


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB, all components in [0, 1]."""
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    i = i.astype(int) % 6
    rgb = np.empty(h.shape + (3,), dtype=np.float64)
    for idx, channels in enumerate(
        [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)]
    ):
        sel = i == idx
        for c in range(3):
            rgb[..., c][sel] = channels[c][sel]
    return rgb


def flow_to_color(flow: FlowField, max_magnitude: float | None = None) -> ImageBuffer:
    """Standard flow color wheel: hue encodes direction, saturation magnitude.

    Zero flow renders white. When ``max_magnitude`` is omitted it defaults to
    5% of the frame diagonal, so near-zero fields render near-white instead of
    amplifying numerical noise to full saturation.
    """
    du = flow.data[..., 0].astype(np.float64)
    dv = flow.data[..., 1].astype(np.float64)
    magnitude = np.hypot(du, dv)
    if max_magnitude is None:
        max_magnitude = 0.05 * math.hypot(flow.width, flow.height)
    if max_magnitude <= 0:
        raise ValueError(f"max_magnitude must be positive, got {max_magnitude}")
    hue = (np.arctan2(dv, du) / (2.0 * np.pi)) % 1.0
    sat = np.clip(magnitude / max_magnitude, 0.0, 1.0)
    rgb = _hsv_to_rgb(hue, sat, np.ones_like(sat))
    return ImageBuffer(rgb.astype(np.float32))
