"""Render backward warping flows with the direction/magnitude color wheel.

White means no displacement; hue encodes direction and saturation magnitude.
A radial barrel flow therefore renders as a symmetric color wheel that
saturates toward the frame border.
"""

from pathlib import Path

import numpy as np

from barrelwarp.dataio import flow_to_color, save_image, write_flow
from barrelwarp.geometry import DistortionParams, Intrinsics
from barrelwarp.warp import fill_scale, gt_backward_flow

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

size = 384
intr = Intrinsics(f=0.8 * size, cx=(size - 1) / 2, cy=(size - 1) / 2)

# With corner-matched fill the displacement measures how far the map is from
# rectilinear: the pure fisheye (k = 0) moves content the most, and raising
# k1 toward the tan-series value (1/3) straightens the map out.
for label, k in [("fisheye", (0.0, 0.0, 0.0, 0.0)), ("half_straightened", (0.15, 0.0, 0.0, 0.0))]:
    params = DistortionParams(k=k, intr=intr)
    params = DistortionParams(k=k, intr=intr, s=fill_scale(params, size, size))
    flow = gt_backward_flow(params, size, size)
    magnitude = np.hypot(flow.data[..., 0], flow.data[..., 1])
    print(f"{label:7s} k1={k[0]:=4.2f}  max displacement {magnitude.max():6.2f} px")
    write_flow(flow, OUT / f"flow_{label}.fdbw")
    save_image(flow_to_color(flow), OUT / f"flow_{label}.png")

print(f"flow files and renderings under {OUT}")
