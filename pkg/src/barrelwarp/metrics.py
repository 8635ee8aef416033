"""Image and flow quality scores: PSNR, SSIM, endpoint error, sharpness.

All scores operate on the unit-interval floating representation with dynamic
range 1.0 (numerically identical to the 8-bit convention, which normalizes
out). Masked variants restrict the mean to valid pixels so border losses from
warping do not dominate interior quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, TooSmall
from .warp import FlowField, ImageBuffer

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Rec. 601 luminance weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass
class MetricReport:
    psnr: float
    ssim: float
    epe: float | None = None
    sharpness: float | None = None

    def to_json_dict(self) -> dict:
        out = {"psnr": self.psnr, "ssim": self.ssim}
        if self.epe is not None:
            out["epe"] = self.epe
        if self.sharpness is not None:
            out["sharpness"] = self.sharpness
        return out


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"{what}: {a.shape} vs {b.shape}")


def psnr(a: ImageBuffer, b: ImageBuffer, mask: np.ndarray | None = None) -> float:
    """10*log10(1/MSE) over masked pixels; +inf for identical inputs."""
    _check_same_shape(a.data, b.data, "psnr inputs")
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    if mask is not None:
        _check_same_shape(mask, a.data[..., 0], "psnr mask")
        diff = diff[mask]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _local_mean(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable windowed mean, cropped to positions with full support."""
    half = kernel.size // 2
    smoothed = correlate1d(plane, kernel, axis=0, mode="constant")
    smoothed = correlate1d(smoothed, kernel, axis=1, mode="constant")
    return smoothed[half:-half, half:-half]


def ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean local SSIM, 11x11 Gaussian window (sigma 1.5), per channel, averaged.

    Only windows fully inside the frame contribute, so both sides need at
    least 11 pixels.
    """
    _check_same_shape(a.data, b.data, "ssim inputs")
    if min(a.width, a.height) < SSIM_WINDOW:
        raise TooSmall(f"ssim needs at least {SSIM_WINDOW} pixels per side")
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    scores = []
    for ch in range(3):
        x = a.data[..., ch].astype(np.float64)
        y = b.data[..., ch].astype(np.float64)
        mu_x = _local_mean(x, kernel)
        mu_y = _local_mean(y, kernel)
        xx = _local_mean(x * x, kernel) - mu_x * mu_x
        yy = _local_mean(y * y, kernel) - mu_y * mu_y
        xy = _local_mean(x * y, kernel) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


def epe(pred: FlowField, gt: FlowField, mask: np.ndarray | None = None) -> float:
    """Mean Euclidean distance between corresponding displacement vectors."""
    _check_same_shape(pred.data, gt.data, "epe inputs")
    diff = pred.data.astype(np.float64) - gt.data.astype(np.float64)
    dist = np.hypot(diff[..., 0], diff[..., 1])
    if mask is not None:
        _check_same_shape(mask, dist, "epe mask")
        dist = dist[mask]
    return float(np.mean(dist))


def sharpness(img: ImageBuffer) -> float:
    """Variance of the 3x3 Laplacian response on the luminance channel."""
    if min(img.width, img.height) < 3:
        raise TooSmall("sharpness needs at least 3 pixels per side")
    luma = img.data.astype(np.float64) @ _LUMA
    lap = (
        luma[:-2, 1:-1]
        + luma[2:, 1:-1]
        + luma[1:-1, :-2]
        + luma[1:-1, 2:]
        - 4.0 * luma[1:-1, 1:-1]
    )
    return float(np.var(lap))


def report(
    a: ImageBuffer,
    b: ImageBuffer,
    flow_a: FlowField | None = None,
    flow_b: FlowField | None = None,
    mask: np.ndarray | None = None,
) -> MetricReport:
    """Bundle the standard scores for one image pair (plus optional flows)."""
    flow_err = None
    if flow_a is not None and flow_b is not None:
        flow_err = epe(flow_a, flow_b, mask)
    return MetricReport(
        psnr=psnr(a, b, mask),
        ssim=ssim(a, b),
        epe=flow_err,
        sharpness=sharpness(a),
    )
