"""Walk through the radial distortion models on a single ray angle sweep.

Produces demos/output/distortion_curves.png showing the forward polynomial
for a few coefficient sets, its numeric inverse, and the odd-polynomial
inverse model next to each other.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from barrelwarp.geometry import distort_angle, inverse_model_angle, undistort_angle

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

theta = np.linspace(0.0, 1.1, 400)

# A pure fisheye (all-zero coefficients) bends rays already; barrel
# coefficients bend them further. The tan-series set cancels the bend almost
# exactly, which is a handy sanity check.
coefficient_sets = {
    "fisheye k=0": (0.0, 0.0, 0.0, 0.0),
    "mild barrel k1=0.15": (0.15, 0.0, 0.0, 0.0),
    "strong barrel k1=0.45": (0.45, -0.02, 0.0, 0.0),
    "tan series (near identity map)": (1 / 3, 2 / 15, 17 / 315, 62 / 2835),
}

fig, axes = plt.subplots(1, 3, figsize=(15, 4.2))

for label, k in coefficient_sets.items():
    axes[0].plot(theta, distort_angle(theta, k), label=label)
axes[0].plot(theta, np.tan(theta), "k:", label="tan (identity radius)")
axes[0].set(xlabel="theta_u [rad]", ylabel="theta_d [rad]", title="forward polynomial")
axes[0].legend(fontsize=7)

# Numeric inversion recovers theta_u from theta_d to machine precision.
k = coefficient_sets["strong barrel k1=0.45"]
theta_d = distort_angle(theta, k)
recovered = undistort_angle(theta_d, k)
axes[1].semilogy(theta, np.abs(recovered - theta) + 1e-18)
axes[1].set(xlabel="theta_u [rad]", ylabel="|round trip error| [rad]", title="numeric inverse")

# The inverse model evaluates theta_u directly from theta_d. With arctan
# Taylor coefficients it approximates the inverse of the tan-series forward
# polynomial.
arctan_series = (1.0, -1 / 3, 1 / 5, -1 / 7, 1 / 9, -1 / 11)
td = np.linspace(0.0, 0.9, 300)
axes[2].plot(td, inverse_model_angle(td, arctan_series), label="odd polynomial (arctan series)")
axes[2].plot(td, np.arctan(td), "k:", label="arctan")
axes[2].set(xlabel="theta_d [rad]", ylabel="theta_u [rad]", title="inverse model")
axes[2].legend(fontsize=8)

fig.tight_layout()
fig.savefig(OUT / "distortion_curves.png", dpi=120)
print(f"wrote {OUT / 'distortion_curves.png'}")
