import math

import numpy as np
import pytest

from barrelwarp.errors import NonMonotonic, SamplingExhausted
from barrelwarp.geometry import (
    CoefficientRanges,
    DistortionParams,
    Intrinsics,
    PixelPoint,
    corner_radius,
    distort_angle,
    distort_angle_derivative,
    inverse_model_angle,
    normalized_to_pixel,
    pixel_to_normalized,
    sample_params,
    theta_from_radius,
    undistort_angle,
    validate_params,
)

# Taylor coefficients of tan: with these the forward polynomial approximates
# tan(theta), i.e. the radial map is close to the identity.
TAN_SERIES = (1.0 / 3.0, 2.0 / 15.0, 17.0 / 315.0, 62.0 / 2835.0)


def sample_valid_k(rng, n, theta_max=1.2, ranges=CoefficientRanges()):
    """Rejection-sample n coefficient sets valid on [0, theta_max]."""
    out = []
    while len(out) < n:
        k = tuple(rng.uniform(lo, hi) for lo, hi in ranges.as_tuple())
        if validate_params(k, theta_max):
            out.append(k)
    return np.array(out)


class TestPixelNormalized:
    def test_principal_point_maps_to_origin(self):
        intr = Intrinsics(f=500.0, cx=256.0, cy=192.0)
        n = pixel_to_normalized(PixelPoint(256.0, 192.0), intr)
        assert n.a == 0.0 and n.b == 0.0

    def test_one_focal_length_is_unit_coordinate(self):
        intr = Intrinsics(f=500.0, cx=256.0, cy=192.0)
        n = pixel_to_normalized(PixelPoint(756.0, 192.0), intr)
        assert n.a == 1.0 and n.b == 0.0

    def test_normalized_to_pixel_examples(self):
        intr = Intrinsics(f=500.0, cx=256.0, cy=192.0)
        from barrelwarp.geometry import NormalizedPoint

        p = normalized_to_pixel(NormalizedPoint(0.0, 0.0), intr)
        assert (p.u, p.v) == (256.0, 192.0)
        p = normalized_to_pixel(NormalizedPoint(1.0, 0.0), intr)
        assert (p.u, p.v) == (756.0, 192.0)

    def test_round_trip_random_points(self):
        rng = np.random.default_rng(7)
        intr = Intrinsics(f=443.7, cx=123.4, cy=321.9)
        u = rng.uniform(-2000, 2000, size=1000)
        v = rng.uniform(-2000, 2000, size=1000)
        n = pixel_to_normalized(PixelPoint(u, v), intr)
        p = normalized_to_pixel(n, intr)
        assert np.max(np.abs(p.u - u)) < 1e-12
        assert np.max(np.abs(p.v - v)) < 1e-12

    def test_intrinsics_validation(self):
        with pytest.raises(ValueError):
            Intrinsics(f=-1.0, cx=0.0, cy=0.0)
        with pytest.raises(ValueError):
            Intrinsics(f=1.0, cx=float("nan"), cy=0.0)


class TestThetaFromRadius:
    def test_known_values(self):
        assert theta_from_radius(0.0) == 0.0
        assert math.isclose(theta_from_radius(1.0), math.pi / 4, rel_tol=0, abs_tol=1e-15)
        assert math.isclose(theta_from_radius(math.sqrt(3.0)), math.pi / 3, abs_tol=1e-15)

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            theta_from_radius(-0.1)

    def test_strictly_increasing(self):
        r = np.linspace(0, 50, 2001)
        th = theta_from_radius(r)
        assert np.all(np.diff(th) > 0)
        assert np.all(th < math.pi / 2)


class TestDistortAngle:
    def test_zero_maps_to_zero(self):
        assert distort_angle(0.0, (0.3, -0.1, 0.02, 0.9)) == 0.0

    def test_direct_evaluation(self):
        assert math.isclose(distort_angle(0.5, (0.1, 0, 0, 0)), 0.5125, abs_tol=1e-15)

    def test_tan_series_approximates_tan(self):
        # high-precision value of the degree-9 tan Taylor polynomial at pi/4
        got = distort_angle(math.pi / 4, TAN_SERIES)
        assert math.isclose(got, 0.99917106679884969, abs_tol=1e-14)
        assert abs(got - math.tan(math.pi / 4)) < 9e-4

    def test_monotone_on_valid_interval(self):
        rng = np.random.default_rng(11)
        for k in sample_valid_k(rng, 20):
            grid = np.linspace(0, 1.2, 4096)
            assert np.all(np.diff(distort_angle(grid, k)) > 0)

    def test_barrel_property_contracts_content(self):
        # all-nonnegative coefficients with s=1: mapped radius < r_u for r_u > 0
        # (grid starts at half a pixel; below that the gap underflows float64)
        f = 500.0
        r_u = np.linspace(0.5, 800.0, 2000)
        theta = np.arctan(r_u / f)
        mapped = f * distort_angle(theta, (0.2, 0.01, 0.0, 0.003))
        assert np.all(mapped < r_u)


class TestUndistortAngle:
    def test_zero_root(self):
        assert undistort_angle(0.0, (0.3, 0.0, 0.0, 0.0)) == 0.0

    def test_known_inverse(self):
        got = undistort_angle(0.5125, (0.1, 0, 0, 0))
        assert abs(got - 0.5) < 1e-10

    def test_bisection_oracle_agreement(self):
        # independent bisection on [0, pi/2) against the Newton path
        k = (0.1, 0.0, 0.0, 0.0)
        target = 0.5125
        lo, hi = 0.0, math.pi / 2 - 1e-9
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if distort_angle(mid, k) < target:
                lo = mid
            else:
                hi = mid
        assert abs(undistort_angle(target, k) - 0.5 * (lo + hi)) < 1e-10

    def test_round_trip_property(self):
        rng = np.random.default_rng(3)
        n = 10_000
        ks = sample_valid_k(rng, 200)
        k = ks[rng.integers(0, len(ks), size=n)]
        theta = rng.uniform(0.0, 1.2, size=n)
        back = undistort_angle(distort_angle(theta, k), k)
        assert np.max(np.abs(back - theta)) < 1e-9

    def test_locally_monotone_params(self):
        # valid only up to ~0.8165; Newton stays inside the basin
        k = (-0.5, 0.0, 0.0, 0.0)
        theta = np.linspace(0.0, 0.8, 50)
        back = undistort_angle(distort_angle(theta, k), k)
        assert np.max(np.abs(back - theta)) < 1e-9

    def test_unreachable_target_raises(self):
        # for k1=-0.5 the polynomial never exceeds its max ~0.544 on [0, pi/2)
        with pytest.raises(NonMonotonic):
            undistort_angle(1.2, (-0.5, 0.0, 0.0, 0.0))

    def test_scalar_matches_array_path(self):
        k = (0.25, -0.01, 0.004, 0.0)
        arr = undistort_angle(np.array([0.3, 0.7]), k)
        assert undistort_angle(0.3, k) == arr[0]
        assert undistort_angle(0.7, k) == arr[1]


class TestInverseModelAngle:
    def test_identity_coefficients(self):
        assert inverse_model_angle(0.37, (1.0,)) == 0.37

    def test_direct_evaluation(self):
        assert math.isclose(inverse_model_angle(0.5, (1.0, 0.1)), 0.5125, abs_tol=1e-15)

    def test_zero(self):
        assert inverse_model_angle(0.0, (1.0, 0.2, -0.3)) == 0.0


class TestValidateParams:
    def test_zero_coefficients_always_valid(self):
        assert validate_params((0, 0, 0, 0), 1.5)

    def test_positive_terms_valid(self):
        assert validate_params((0.3, 0, 0, 0), 1.2)

    def test_derivative_root_boundary(self):
        # derivative 1 - 1.5 theta^2 crosses zero at sqrt(2/3) = 0.81650
        assert validate_params((-0.5, 0, 0, 0), 0.8)
        assert not validate_params((-0.5, 0, 0, 0), 0.9)

    def test_theta_max_domain(self):
        with pytest.raises(ValueError):
            validate_params((0, 0, 0, 0), 0.0)
        with pytest.raises(ValueError):
            validate_params((0, 0, 0, 0), math.pi)


class TestSampleParams:
    def test_deterministic_per_seed(self):
        intr = Intrinsics(f=400.0, cx=127.5, cy=127.5)
        ranges = CoefficientRanges()
        a = sample_params(42, ranges, (256, 256), intr)
        b = sample_params(42, ranges, (256, 256), intr)
        assert a == b

    def test_degenerate_ranges_give_zero(self):
        intr = Intrinsics(f=400.0, cx=127.5, cy=127.5)
        ranges = CoefficientRanges(k1=(0, 0), k2=(0, 0), k3=(0, 0), k4=(0, 0))
        p = sample_params(0, ranges, (256, 256), intr)
        assert p.k == (0.0, 0.0, 0.0, 0.0)

    def test_all_samples_valid(self):
        intr = Intrinsics(f=204.8, cx=127.5, cy=127.5)
        ranges = CoefficientRanges()
        theta_max = math.atan(corner_radius(256, 256, intr) / intr.f)
        for seed in range(1000):
            p = sample_params(seed, ranges, (256, 256), intr)
            assert validate_params(p.k, theta_max)

    def test_exhaustion(self):
        intr = Intrinsics(f=100.0, cx=127.5, cy=127.5)
        # forced non-monotonic everywhere: huge negative k1
        ranges = CoefficientRanges(k1=(-50.0, -50.0), k2=(0, 0), k3=(0, 0), k4=(0, 0))
        with pytest.raises(SamplingExhausted):
            sample_params(0, ranges, (256, 256), intr, max_attempts=50)


class TestDerivative:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        k = (0.21, -0.03, 0.008, 0.001)
        theta = rng.uniform(0.05, 1.2, size=100)
        h = 1e-6
        fd = (distort_angle(theta + h, k) - distort_angle(theta - h, k)) / (2 * h)
        assert np.max(np.abs(fd - distort_angle_derivative(theta, k))) < 1e-7


def test_tan_series_near_identity_pixels():
    # |f*theta_d - f*tan(theta_u)| stays below half a pixel up to 45 degrees
    f = 500.0
    theta = np.linspace(0.0, math.pi / 4, 4001)
    err = np.abs(f * distort_angle(theta, TAN_SERIES) - f * np.tan(theta))
    assert err.max() < 0.5


def test_distortion_params_validation():
    intr = Intrinsics(f=10.0, cx=0.0, cy=0.0)
    with pytest.raises(ValueError):
        DistortionParams(k=(0.0, 0.0, 0.0), intr=intr)  # type: ignore[arg-type]
    with pytest.raises(ValueError):
        DistortionParams(k=(0.0, 0.0, 0.0, 0.0), intr=intr, s=0.0)
