"""Synthesize a barrel-distorted frame from a photograph and rectify it back.

Saves the ground truth, the distorted frame, the oracle rectification, and
prints the quality numbers. The rectification uses the analytic backward
flow, so the only losses are the two bilinear resamplings.
"""

from pathlib import Path

import numpy as np
import skimage.data

from barrelwarp.dataio import save_image
from barrelwarp.geometry import DistortionParams, Intrinsics
from barrelwarp.metrics import psnr, ssim
from barrelwarp.pipeline import oracle_rectify
from barrelwarp.warp import ImageBuffer, central_crop, fill_scale, synthesize_distorted

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

gt = ImageBuffer(skimage.data.astronaut().astype(np.float32) / 255.0)
size = gt.width

# Coefficients of a fairly strong barrel lens; the fill scale stretches the
# distorted content so the frame corner stays populated.
intr = Intrinsics(f=0.8 * size, cx=(size - 1) / 2, cy=(size - 1) / 2)
params = DistortionParams(k=(0.25, -0.01, 0.0, 0.0), intr=intr)
params = DistortionParams(k=params.k, intr=intr, s=fill_scale(params, size, size))
print(f"coefficients {params.k}, fill scale {params.s:.4f}")

distorted, synth_mask = synthesize_distorted(gt, params)
rectified, rect_mask = oracle_rectify(distorted, params)

save_image(gt, OUT / "gt.png")
save_image(distorted, OUT / "distorted.png")
save_image(rectified, OUT / "rectified.png")

crop = lambda image: ImageBuffer(central_crop(image.data, 0.8))
print(f"distorted vs gt : {psnr(crop(distorted), crop(gt)):6.2f} dB  ssim {ssim(crop(distorted), crop(gt)):.4f}")
print(f"rectified vs gt : {psnr(crop(rectified), crop(gt)):6.2f} dB  ssim {ssim(crop(rectified), crop(gt)):.4f}")
print(f"valid rectified samples: {100.0 * rect_mask.mean():.1f}%")
print(f"images under {OUT}")
