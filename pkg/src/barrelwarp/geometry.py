"""Camera model and radial distortion models for barrel-distortion synthesis.

Model family (equidistant / fisheye convention):

  - normalized camera coordinates: ``a = (u - cx) / f``, ``b = (v - cy) / f``
  - undistorted radius ``r_u = sqrt(a^2 + b^2)``, ray angle ``theta_u = arctan(r_u)``
  - forward distortion polynomial::

        theta_d = theta_u * (1 + k1*theta_u^2 + k2*theta_u^4 + k3*theta_u^6 + k4*theta_u^8)

  - the distorted radius in normalized units is ``s * theta_d`` (equidistant
    reading: image radius proportional to ray angle), so the distorted pixel
    radius is ``s * f * theta_d``. With ``k = 0`` the map is a pure fisheye.

The forward polynomial has no closed-form inverse; :func:`undistort_angle`
inverts it numerically (Newton from ``theta_d`` with a bisection fallback).
A separate odd-polynomial inverse model::

        theta_u = c1*theta_d + c2*theta_d^3 + c3*theta_d^5 + ...

is evaluated directly by :func:`inverse_model_angle` and drives the comparison
synthesis mode.

All angle math is double precision. Functions are array-first: scalars or
ndarrays broadcast alike, and everything here is pure (safe to call from any
number of threads).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NoConvergence, NonMonotonic, SamplingExhausted

_HALF_PI = math.pi / 2.0
# Upper bracket edge for the numeric inversion; theta_u must stay below pi/2.
_THETA_HI = _HALF_PI - 1e-9


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics: focal length in pixels and principal point.

    Pixel coordinates have their origin at the top-left pixel center,
    u = column, v = row.
    """

    f: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.f > 0 and math.isfinite(self.f)):
            raise ValueError(f"focal length must be positive and finite, got {self.f}")
        if not (math.isfinite(self.cx) and math.isfinite(self.cy)):
            raise ValueError(f"principal point must be finite, got ({self.cx}, {self.cy})")


@dataclass(frozen=True)
class DistortionParams:
    """Four radial coefficients plus intrinsics and the fill scale ``s``.

    ``s`` rescales the distorted radius after the angle polynomial; ``s = 1``
    leaves the equidistant radius untouched, while a corner-matched value
    (see ``warp.fill_scale``) makes distorted content span the full frame.
    """

    k: tuple[float, float, float, float]
    intr: Intrinsics
    s: float = 1.0

    def __post_init__(self):
        if len(self.k) != 4:
            raise ValueError(f"expected 4 coefficients, got {len(self.k)}")
        if not all(math.isfinite(v) for v in self.k):
            raise ValueError(f"coefficients must be finite, got {self.k}")
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValueError(f"fill scale must be positive and finite, got {self.s}")


class PixelPoint(NamedTuple):
    u: float
    v: float


class NormalizedPoint(NamedTuple):
    a: float
    b: float


def pixel_to_normalized(p: PixelPoint, intr: Intrinsics) -> NormalizedPoint:
    """Divide out the focal length: (u, v) -> ((u-cx)/f, (v-cy)/f)."""
    return NormalizedPoint((p.u - intr.cx) / intr.f, (p.v - intr.cy) / intr.f)


def normalized_to_pixel(n: NormalizedPoint, intr: Intrinsics) -> PixelPoint:
    """Exact inverse of :func:`pixel_to_normalized`."""
    return PixelPoint(n.a * intr.f + intr.cx, n.b * intr.f + intr.cy)


def theta_from_radius(r_u):
    """Ray angle from the normalized undistorted radius: theta_u = arctan(r_u).

    ``r_u`` must be nonnegative; the result lies in [0, pi/2).
    """
    r_u = np.asarray(r_u, dtype=np.float64)
    if np.any(r_u < 0):
        raise ValueError("undistorted radius must be nonnegative")
    return np.arctan(r_u)[()]


def distort_angle(theta_u, k):
    """Forward polynomial theta_d = theta_u * (1 + k1 t^2 + k2 t^4 + k3 t^6 + k4 t^8).

    Evaluated in Horner form in theta_u^2. ``k`` is a length-4 sequence, or an
    array of shape (..., 4) broadcasting against ``theta_u`` for per-element
    coefficient sets.
    """
    theta_u = np.asarray(theta_u, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    k1, k2, k3, k4 = (k[..., i] for i in range(4))
    t2 = theta_u * theta_u
    return (theta_u * (1.0 + t2 * (k1 + t2 * (k2 + t2 * (k3 + t2 * k4)))))[()]


def distort_angle_derivative(theta_u, k):
    """d(theta_d)/d(theta_u) = 1 + 3 k1 t^2 + 5 k2 t^4 + 7 k3 t^6 + 9 k4 t^8."""
    theta_u = np.asarray(theta_u, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    k1, k2, k3, k4 = (k[..., i] for i in range(4))
    t2 = theta_u * theta_u
    return (1.0 + t2 * (3.0 * k1 + t2 * (5.0 * k2 + t2 * (7.0 * k3 + t2 * 9.0 * k4))))[()]


def undistort_angle(theta_d, k, *, tol: float = 1e-10, max_iter: int = 50):
    """Invert the forward polynomial: find theta_u with distort_angle(theta_u) = theta_d.

    Newton iteration initialized at ``theta_d`` with tolerance ``tol`` on the
    residual; elements whose Newton steps leave [0, pi/2) fall back to
    bisection on that bracket. Deterministic: scalar and array calls share one
    code path.

    Args:
        theta_d: distorted angle(s), >= 0.
        k: length-4 coefficients, or shape (..., 4) broadcasting per element.

    Raises:
        NonMonotonic: the fallback bracket does not straddle the root.
        NoConvergence: residual tolerance unmet within the iteration budget.
    """
    theta_d = np.asarray(theta_d, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    scalar = theta_d.ndim == 0 and k.ndim == 1

    shape = np.broadcast_shapes(theta_d.shape, k.shape[:-1])
    td = np.broadcast_to(theta_d, shape).reshape(-1).copy()
    kk = np.ascontiguousarray(np.broadcast_to(k, shape + (4,)).reshape(-1, 4))

    # Restrict the search to the polynomial's maximal monotone prefix of
    # [0, pi/2): beyond its first turning point extra roots appear that do
    # not correspond to the distortion map. One coefficient set (the dense
    # flow case) needs the bound computed only once.
    if k.ndim == 1:
        hi = np.full_like(td, _monotone_upper_bound(k[None, :])[0])
    else:
        hi = _monotone_upper_bound(kk)

    theta = np.minimum(td, hi)  # Newton starting point, projected into bracket
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            g = distort_angle(theta, kk) - td
            done = np.abs(g) < tol
            if np.all(done):
                break
            dg = distort_angle_derivative(theta, kk)
            step = np.where(dg != 0.0, g / np.where(dg != 0.0, dg, 1.0), np.nan)
            theta = np.where(done, theta, np.clip(theta - step, 0.0, hi))

        bad = ~np.isfinite(theta)
        bad |= np.abs(distort_angle(np.where(bad, 0.0, theta), kk) - td) >= tol
        if np.any(bad):
            theta[bad] = _bisect_angle(td[bad], kk[bad], hi[bad], tol=tol)

        # two polish steps push the angle error to the float64 floor even
        # where a small derivative makes the residual tolerance loose
        for _ in range(2):
            g = distort_angle(theta, kk) - td
            dg = distort_angle_derivative(theta, kk)
            step = np.where(dg > 0.0, g / np.where(dg > 0.0, dg, 1.0), 0.0)
            theta = np.clip(theta - step, 0.0, hi)

    residual = np.abs(distort_angle(theta, kk) - td)
    if np.any(residual >= tol):
        worst = float(residual.max())
        raise NoConvergence(f"residual {worst:.3e} above tolerance {tol:.1e}")

    out = theta.reshape(shape)
    return float(out) if scalar else out


def _monotone_upper_bound(kk: np.ndarray, *, chunk: int = 4096) -> np.ndarray:
    """Per row of ``kk``: pi/2 - eps, or the derivative's first zero if smaller.

    Grid scan (same density as validate_params) plus bisection refinement of
    the sign change.
    """
    grid = np.linspace(0.0, _THETA_HI, 257)
    out = np.full(kk.shape[0], _THETA_HI)
    # all-nonnegative coefficients keep the derivative >= 1 everywhere
    needs_scan = np.any(kk < 0.0, axis=1).nonzero()[0]
    for start in range(0, needs_scan.size, chunk):
        sel = needs_scan[start : start + chunk]
        rows = kk[sel]
        deriv = distort_angle_derivative(grid[None, :], rows[:, None, :])  # (m, G)
        nonpos = deriv <= 0.0
        has_turn = nonpos.any(axis=1)
        first = np.where(has_turn, nonpos.argmax(axis=1), grid.size - 1)
        d_lo = grid[np.maximum(first - 1, 0)]
        d_hi = grid[first]
        for _ in range(60):
            mid = 0.5 * (d_lo + d_hi)
            pos = distort_angle_derivative(mid, rows) > 0.0
            d_lo = np.where(has_turn & pos, mid, d_lo)
            d_hi = np.where(has_turn & ~pos, mid, d_hi)
        out[sel] = np.where(has_turn, d_lo, _THETA_HI)
    return out


def _bisect_angle(
    td: np.ndarray, kk: np.ndarray, hi: np.ndarray, *, tol: float, max_iter: int = 200
) -> np.ndarray:
    """Bisection fallback on [0, hi]. g(0) = -theta_d <= 0 always holds."""
    if np.any(distort_angle(hi, kk) - td < 0.0):
        raise NonMonotonic(
            "no sign change on the monotone bracket: "
            "the polynomial never reaches the target angle"
        )
    lo = np.zeros_like(td)
    hi = hi.copy()
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        g_mid = distort_angle(mid, kk) - td
        done = np.abs(g_mid) < tol
        take_lo = g_mid < 0.0
        lo = np.where(take_lo & ~done, mid, lo)
        hi = np.where(~take_lo & ~done, mid, hi)
        if np.all(done) or np.all(hi - lo < 1e-16):
            break
    return 0.5 * (lo + hi)


def inverse_model_angle(theta_d, k_inv):
    """Odd-polynomial inverse model: theta_u = sum_i c_i * theta_d^(2i-1).

    ``k_inv`` may have any number of coefficients; evaluated in Horner form
    in theta_d^2.
    """
    theta_d = np.asarray(theta_d, dtype=np.float64)
    coeffs = [float(c) for c in k_inv]
    t2 = theta_d * theta_d
    acc = np.zeros_like(theta_d)
    for c in reversed(coeffs):
        acc = c + t2 * acc
    return (theta_d * acc)[()]


def validate_params(k, theta_max: float, *, samples: int = 1024) -> bool:
    """True iff the forward polynomial is strictly increasing on [0, theta_max].

    Checks the derivative polynomial on a dense grid (>= 1024 points) that
    includes both endpoints.
    """
    if not (0.0 < theta_max < _HALF_PI):
        raise ValueError(f"theta_max must lie in (0, pi/2), got {theta_max}")
    grid = np.linspace(0.0, theta_max, max(int(samples), 1024))
    return bool(np.all(distort_angle_derivative(grid, np.asarray(k, dtype=np.float64)) > 0.0))


@dataclass(frozen=True)
class CoefficientRanges:
    """Uniform sampling ranges for the four radial coefficients.

    Defaults give visibly varying barrel strengths while keeping the forward
    polynomial invertible over typical frame diagonals.
    """

    k1: tuple[float, float] = (0.0, 0.5)
    k2: tuple[float, float] = (-0.05, 0.05)
    k3: tuple[float, float] = (-0.05, 0.05)
    k4: tuple[float, float] = (-0.05, 0.05)

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"bad range for {name}: ({lo}, {hi})")

    def as_tuple(self):
        return (self.k1, self.k2, self.k3, self.k4)


def sample_params(
    rng_seed: int,
    ranges: CoefficientRanges,
    frame: tuple[int, int],
    intr: Intrinsics,
    *,
    s: float = 1.0,
    max_attempts: int = 1000,
) -> DistortionParams:
    """Draw coefficients uniformly from ``ranges``, rejecting non-monotonic sets.

    Validity is checked at the frame's corner angle
    ``theta_max = arctan(corner_radius / f)`` so the sampled polynomial is
    invertible everywhere in frame. Deterministic per seed.

    Raises:
        SamplingExhausted: after ``max_attempts`` rejected draws.
    """
    width, height = frame
    r_corner = corner_radius(width, height, intr)
    theta_max = float(np.arctan(r_corner / intr.f))
    rng = np.random.default_rng(rng_seed)
    for _ in range(max_attempts):
        k = tuple(float(rng.uniform(lo, hi)) for lo, hi in ranges.as_tuple())
        if validate_params(k, theta_max):
            return DistortionParams(k=k, intr=intr, s=s)
    raise SamplingExhausted(
        f"no valid coefficient set in {max_attempts} draws for ranges {ranges}"
    )


def corner_radius(width: int, height: int, intr: Intrinsics) -> float:
    """Largest distance (px) from the principal point to a corner pixel center."""
    us = np.array([0.0, width - 1.0, 0.0, width - 1.0])
    vs = np.array([0.0, 0.0, height - 1.0, height - 1.0])
    return float(np.max(np.hypot(us - intr.cx, vs - intr.cy)))
