"""Dense backward flows, bilinear warping, distortion synthesis, and pyramids.

Conventions:

  - Images are (H, W, 3) float32 arrays with samples in [0, 1].
  - Flows are (H, W, 2) float32 arrays of backward displacements in pixels:
    output pixel (u, v) samples the source at (u + du, v + dv), with
    du = data[v, u, 0] and dv = data[v, u, 1].
  - Validity masks are (H, W) bool arrays, True where the backward sample
    landed inside the source frame.

Sampling clamps to the border instead of zero-filling, so synthesized frames
carry no dark halo; the mask keeps the clamped region identifiable. All
geometry is evaluated in double precision and quantized to float32 only at
the array boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainExceeded, InvalidParams, TooSmall
from .geometry import (
    DistortionParams,
    corner_radius,
    distort_angle,
    inverse_model_angle,
    undistort_angle,
    validate_params,
)

_HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class ImageBuffer:
    """H x W x 3 raster, float32, unit interval."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 3 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError(f"expected (H, W, 3) image data, got shape {d.shape}")
        if d.dtype != np.float32:
            object.__setattr__(self, "data", d.astype(np.float32))
            d = self.data
        if not np.all(np.isfinite(d)):
            raise ValueError("image samples must be finite")
        if d.min() < 0.0 or d.max() > 1.0:
            raise ValueError("image samples must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class FlowField:
    """H x W x 2 backward displacement field, float32, components (du, dv)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError(f"expected (H, W, 2) flow data, got shape {d.shape}")
        if d.dtype != np.float32:
            object.__setattr__(self, "data", d.astype(np.float32))
            d = self.data
        if not np.all(np.isfinite(d)):
            raise ValueError("flow components must be finite")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def bilinear_sample(img: ImageBuffer, x: float, y: float):
    """Sample one location; returns (rgb triple, in_bounds).

    Coordinates outside [0, W-1] x [0, H-1] are clamped to the border and
    flagged out of bounds.
    """
    values, inb = _bilinear_gather(img.data, np.float64(x), np.float64(y))
    return values, bool(inb)


def _bilinear_gather(data: np.ndarray, xs, ys):
    """Vectorized bilinear blend of the 4 nearest pixel centers, clamped."""
    h, w = data.shape[:2]
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    inb = (xs >= 0.0) & (xs <= w - 1.0) & (ys >= 0.0) & (ys <= h - 1.0)
    x = np.clip(xs, 0.0, w - 1.0)
    y = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    x0i = x0.astype(np.intp)
    y0i = y0.astype(np.intp)
    x1i = np.minimum(x0i + 1, w - 1)
    y1i = np.minimum(y0i + 1, h - 1)
    v00 = data[y0i, x0i]
    v10 = data[y0i, x1i]
    v01 = data[y1i, x0i]
    v11 = data[y1i, x1i]
    out = (
        v00 * (1.0 - fx) * (1.0 - fy)
        + v10 * fx * (1.0 - fy)
        + v01 * (1.0 - fx) * fy
        + v11 * fx * fy
    )
    return out.astype(np.float32), inb


def forward_pixel_map(params: DistortionParams, us, vs):
    """Map undistorted pixel coordinates to their distorted locations (float64).

    Normalize, take the ray angle, push it through the forward polynomial,
    and place the result at radius s*f*theta_d along the same azimuth.
    """
    intr = params.intr
    dx = np.asarray(us, dtype=np.float64) - intr.cx
    dy = np.asarray(vs, dtype=np.float64) - intr.cy
    r_px = np.hypot(dx, dy)
    theta_u = np.arctan(r_px / intr.f)
    theta_d = distort_angle(theta_u, params.k)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(r_px > 0.0, params.s * intr.f * theta_d / np.where(r_px > 0.0, r_px, 1.0), 0.0)
    return intr.cx + scale * dx, intr.cy + scale * dy


def inverse_pixel_map(params: DistortionParams, us, vs, mode: str = "forward", k_inv=None):
    """Map distorted pixel coordinates to their undistorted source (float64).

    In "forward" mode the forward polynomial is inverted numerically; in
    "inverse_model" mode the odd-polynomial model evaluates the undistorted
    angle directly. The source radius is f*tan(theta_u).

    Raises:
        DomainExceeded: some requested pixel has theta_d >= pi/2.
    """
    intr = params.intr
    dx = np.asarray(us, dtype=np.float64) - intr.cx
    dy = np.asarray(vs, dtype=np.float64) - intr.cy
    r_px = np.hypot(dx, dy)
    theta_d = r_px / (params.s * intr.f)
    if np.any(theta_d >= _HALF_PI):
        raise DomainExceeded(
            f"distorted angle reaches {float(np.max(theta_d)):.4f} rad inside the frame"
        )
    if mode == "forward":
        theta_u = undistort_angle(theta_d, params.k)
    elif mode == "inverse_model":
        if k_inv is None:
            raise ValueError("inverse_model mode requires k_inv coefficients")
        theta_u = inverse_model_angle(theta_d, k_inv)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    # guard tan blow-up for inverse-model coefficients that overshoot pi/2;
    # those samples land far outside the frame and are masked invalid
    theta_u = np.clip(theta_u, 0.0, _HALF_PI - 1e-9)
    r_src = intr.f * np.tan(theta_u)
    scale = np.where(r_px > 0.0, r_src / np.where(r_px > 0.0, r_px, 1.0), 0.0)
    return intr.cx + scale * dx, intr.cy + scale * dy


def _pixel_grid(width: int, height: int):
    us, vs = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    return us, vs


def gt_backward_flow(params: DistortionParams, width: int, height: int) -> FlowField:
    """Analytic backward flow: at each rectified pixel p, the displacement to
    its distorted location, so warping the distorted image by this flow
    rectifies it.

    Raises:
        InvalidParams: the coefficients are non-monotonic at the frame corner.
    """
    theta_corner = math.atan(corner_radius(width, height, params.intr) / params.intr.f)
    if not validate_params(params.k, theta_corner):
        raise InvalidParams(
            f"coefficients {params.k} are not monotone up to the corner angle "
            f"{theta_corner:.4f}"
        )
    us, vs = _pixel_grid(width, height)
    xs, ys = forward_pixel_map(params, us, vs)
    flow = np.stack([xs - us, ys - vs], axis=-1)
    return FlowField(flow.astype(np.float32))


def apply_backward_flow(src: ImageBuffer, flow: FlowField):
    """Warp: output(u, v) = bilinear_sample(src, u + du, v + dv).

    Output dimensions follow the flow. Returns (image, validity mask).
    """
    us, vs = _pixel_grid(flow.width, flow.height)
    xs = us + flow.data[..., 0].astype(np.float64)
    ys = vs + flow.data[..., 1].astype(np.float64)
    values, inb = _bilinear_gather(src.data, xs, ys)
    return ImageBuffer(values), inb


def synthesize_distorted(
    gt: ImageBuffer,
    params: DistortionParams,
    mode: str = "forward",
    k_inv=None,
):
    """Render the barrel-distorted version of ``gt`` by pulling per output pixel.

    Each distorted pixel is filled by sampling the ground truth at its inverse
    radial map, so the result has no holes. "forward" mode inverts the forward
    polynomial numerically; "inverse_model" evaluates the odd-polynomial model
    directly. Output dimensions equal the input's.

    Returns (image, validity mask).
    """
    us, vs = _pixel_grid(gt.width, gt.height)
    xs, ys = inverse_pixel_map(params, us, vs, mode=mode, k_inv=k_inv)
    values, inb = _bilinear_gather(gt.data, xs, ys)
    return ImageBuffer(values), inb


def fill_scale(params: DistortionParams, width: int, height: int) -> float:
    """Corner-matched fill scale: with this ``s`` the undistorted frame corner
    maps exactly onto the distorted frame corner, so barrel content fills the
    output frame."""
    r_corner = corner_radius(width, height, params.intr)
    theta_corner = math.atan(r_corner / params.intr.f)
    return r_corner / (params.intr.f * float(distort_angle(theta_corner, params.k)))


def _block_mean(data: np.ndarray) -> np.ndarray:
    """2x2 box average; ragged edge blocks average over the pixels present."""
    h, w = data.shape[:2]
    rows = np.arange(0, h, 2)
    cols = np.arange(0, w, 2)
    acc = np.add.reduceat(np.add.reduceat(data.astype(np.float64), rows, axis=0), cols, axis=1)
    nrow = np.minimum(rows + 2, h) - rows
    ncol = np.minimum(cols + 2, w) - cols
    counts = (nrow[:, None] * ncol[None, :]).astype(np.float64)
    return (acc / counts[..., None]).astype(np.float32)


def downsample_flow(flow: FlowField) -> FlowField:
    """Half-resolution flow: 2x2 average, components halved so displacements
    stay correct in the coarser pixel grid."""
    if flow.width < 2 or flow.height < 2:
        raise TooSmall(f"flow {flow.width}x{flow.height} cannot be downsampled")
    return FlowField(_block_mean(flow.data) * np.float32(0.5))


def image_pyramid(img: ImageBuffer, levels: int) -> list[ImageBuffer]:
    """L-level stack at halving resolutions; index 0 is the input, -1 coarsest.

    Raises:
        TooSmall: the image cannot sustain the requested number of halvings.
    """
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if min(img.width, img.height) < 2 ** (levels - 1):
        raise TooSmall(
            f"{img.width}x{img.height} image cannot support {levels} pyramid levels"
        )
    out = [img]
    for _ in range(levels - 1):
        out.append(ImageBuffer(_block_mean(out[-1].data)))
    return out


def central_crop(data: np.ndarray, fraction: float = 0.8) -> np.ndarray:
    """Axis-aligned centered crop covering ``fraction`` of each dimension."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    h, w = data.shape[:2]
    ch = max(1, int(round(h * fraction)))
    cw = max(1, int(round(w * fraction)))
    top = (h - ch) // 2
    left = (w - cw) // 2
    return data[top : top + ch, left : left + cw]
