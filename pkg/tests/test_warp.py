import math

import numpy as np
import pytest

from barrelwarp.errors import DomainExceeded, InvalidParams, TooSmall
from barrelwarp.geometry import (
    DistortionParams,
    Intrinsics,
    NormalizedPoint,
    PixelPoint,
    distort_angle,
    normalized_to_pixel,
    pixel_to_normalized,
    theta_from_radius,
)
from barrelwarp.warp import (
    FlowField,
    ImageBuffer,
    apply_backward_flow,
    bilinear_sample,
    central_crop,
    downsample_flow,
    fill_scale,
    gt_backward_flow,
    image_pyramid,
    synthesize_distorted,
)

TAN_SERIES = (1.0 / 3.0, 2.0 / 15.0, 17.0 / 315.0, 62.0 / 2835.0)


def random_image(rng, h, w):
    return ImageBuffer(rng.random((h, w, 3), dtype=np.float32))


def smooth_image(rng, h, w):
    """Low-frequency test image: random coarse grid upsampled bilinearly."""
    coarse = rng.random((h // 16 + 2, w // 16 + 2, 3))
    ys = np.linspace(0, coarse.shape[0] - 1.001, h)
    xs = np.linspace(0, coarse.shape[1] - 1.001, w)
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    img = (
        coarse[y0][:, x0] * (1 - fx) * (1 - fy)
        + coarse[y0][:, x0 + 1] * fx * (1 - fy)
        + coarse[y0 + 1][:, x0] * (1 - fx) * fy
        + coarse[y0 + 1][:, x0 + 1] * fx * fy
    )
    return ImageBuffer(img.astype(np.float32))


def centered_params(size, k, f=None, s=1.0):
    f = f if f is not None else 0.8 * size
    intr = Intrinsics(f=f, cx=(size - 1) / 2.0, cy=(size - 1) / 2.0)
    return DistortionParams(k=k, intr=intr, s=s)


def psnr_simple(a, b):
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    return 10.0 * math.log10(1.0 / mse)


class TestBilinearSample:
    def test_lattice_point_is_exact(self):
        rng = np.random.default_rng(0)
        img = random_image(rng, 5, 7)
        value, inb = bilinear_sample(img, 2.0, 3.0)
        assert inb
        assert np.array_equal(value, img.data[3, 2])

    def test_center_of_four_pixels_is_mean(self):
        data = np.zeros((2, 2, 3), dtype=np.float32)
        data[0, 0] = 0.0
        data[0, 1] = 0.1
        data[1, 0] = 0.2
        data[1, 1] = 0.3
        value, inb = bilinear_sample(ImageBuffer(data), 0.5, 0.5)
        assert inb
        np.testing.assert_allclose(value, 0.15, atol=1e-7)

    def test_clamp_policy(self):
        rng = np.random.default_rng(1)
        img = random_image(rng, 4, 4)
        value, inb = bilinear_sample(img, -5.0, 0.0)
        assert not inb
        assert np.array_equal(value, img.data[0, 0])


class TestGtBackwardFlow:
    def test_flow_at_principal_point_is_zero(self):
        params = centered_params(65, (0.3, -0.01, 0.0, 0.0), f=52.0)
        # integer principal point so a grid pixel sits exactly on it
        flow = gt_backward_flow(params, 65, 65)
        assert flow.data[32, 32, 0] == 0.0
        assert flow.data[32, 32, 1] == 0.0

    def test_azimuthal_antisymmetry(self):
        params = centered_params(65, (0.25, 0.0, 0.01, 0.0), f=52.0)
        flow = gt_backward_flow(params, 65, 65)
        for d in (3, 9, 17, 30):
            right = flow.data[32, 32 + d]
            left = flow.data[32, 32 - d]
            np.testing.assert_allclose(left, -right, atol=1e-6)
            assert abs(right[1]) < 1e-6  # purely radial on the center row

    def test_against_scalar_composition_oracle(self):
        # hand-compose the per-pixel radial map through the public scalar ops
        size = 128
        params = centered_params(size, (0.22, -0.02, 0.004, 0.001), f=100.0, s=1.1)
        from barrelwarp.warp import forward_pixel_map

        rng = np.random.default_rng(9)
        intr = params.intr
        for _ in range(100):
            u = float(rng.uniform(0, size - 1))
            v = float(rng.uniform(0, size - 1))
            n = pixel_to_normalized(PixelPoint(u, v), intr)
            r_u = math.hypot(n.a, n.b)
            theta_u = theta_from_radius(r_u)
            theta_d = float(distort_angle(theta_u, params.k))
            if r_u > 0:
                scale = params.s * theta_d / r_u
                dst = normalized_to_pixel(NormalizedPoint(n.a * scale, n.b * scale), intr)
            else:
                dst = PixelPoint(intr.cx, intr.cy)
            xs, ys = forward_pixel_map(params, u, v)
            assert abs(float(xs) - dst.u) < 1e-6
            assert abs(float(ys) - dst.v) < 1e-6

    def test_invalid_params_rejected(self):
        params = centered_params(512, (-0.5, 0.0, 0.0, 0.0), f=300.0)
        with pytest.raises(InvalidParams):
            gt_backward_flow(params, 512, 512)


class TestApplyBackwardFlow:
    def test_zero_flow_is_identity(self):
        rng = np.random.default_rng(2)
        img = random_image(rng, 33, 47)
        flow = FlowField(np.zeros((33, 47, 2), dtype=np.float32))
        out, mask = apply_backward_flow(img, flow)
        assert np.array_equal(out.data, img.data)
        assert mask.all()

    def test_uniform_flow_translates(self):
        rng = np.random.default_rng(3)
        img = random_image(rng, 8, 8)
        flow = np.zeros((8, 8, 2), dtype=np.float32)
        flow[..., 0] = 1.0
        out, mask = apply_backward_flow(img, FlowField(flow))
        assert np.array_equal(out.data[:, :-1], img.data[:, 1:])
        assert mask[:, :-1].all()
        assert not mask[:, -1].any()

    def test_round_trip_rectification_quality(self):
        rng = np.random.default_rng(4)
        size = 256
        for k1 in (0.1, 0.2, 0.3):
            gt = smooth_image(rng, size, size)
            params = centered_params(size, (k1, 0.0, 0.0, 0.0))
            params = DistortionParams(
                k=params.k, intr=params.intr, s=fill_scale(params, size, size)
            )
            distorted, _ = synthesize_distorted(gt, params)
            rect, _ = apply_backward_flow(distorted, gt_backward_flow(params, size, size))
            score = psnr_simple(central_crop(rect.data), central_crop(gt.data))
            assert score > 28.0, f"k1={k1}: {score:.2f} dB"


class TestSynthesizeDistorted:
    def test_near_identity_with_tan_series(self):
        rng = np.random.default_rng(5)
        size = 256
        # f chosen so the corner angle stays within pi/4
        gt = smooth_image(rng, size, size)
        params = centered_params(size, TAN_SERIES, f=1.05 * (size - 1) / math.sqrt(2.0), s=1.0)
        out, _ = synthesize_distorted(gt, params)
        score = psnr_simple(central_crop(out.data), central_crop(gt.data))
        assert score > 40.0, f"{score:.2f} dB"

    def test_center_row_invariant_under_radial_map(self):
        # horizontal stripe image: the row through the principal point maps to itself
        size = 65
        data = np.zeros((size, size, 3), dtype=np.float32)
        data[32, :, :] = 1.0
        params = centered_params(size, (0.3, 0.0, 0.0, 0.0), f=52.0)
        out, _ = synthesize_distorted(ImageBuffer(data), params)
        # the center row keeps full intensity; everything else stays dark
        assert out.data[32].max() == 1.0
        other = np.delete(out.data, 32, axis=0)
        assert other.max() < 0.5

    def test_inverse_model_identity_coefficients_match_pure_fisheye(self):
        # k_inv = (1,) evaluates theta_u = theta_d, exactly the numeric
        # inverse of the forward polynomial with zero coefficients
        rng = np.random.default_rng(6)
        size = 128
        gt = smooth_image(rng, size, size)
        params = centered_params(size, (0.0, 0.0, 0.0, 0.0), f=200.0)
        fwd, _ = synthesize_distorted(gt, params, mode="forward")
        inv, _ = synthesize_distorted(gt, params, mode="inverse_model", k_inv=(1.0,))
        np.testing.assert_allclose(fwd.data, inv.data, atol=1e-6)

    def test_inverse_model_arctan_series_matches_forward_tan_series(self):
        # forward tan-series and the arctan-series inverse model both realize
        # a near-identity pixel map, so the two modes agree closely
        rng = np.random.default_rng(6)
        size = 128
        gt = smooth_image(rng, size, size)
        params = centered_params(size, TAN_SERIES, f=200.0)
        fwd, _ = synthesize_distorted(gt, params, mode="forward")
        inv, _ = synthesize_distorted(
            gt,
            params,
            mode="inverse_model",
            k_inv=(1.0, -1.0 / 3.0, 1.0 / 5.0, -1.0 / 7.0, 1.0 / 9.0, -1.0 / 11.0),
        )
        assert psnr_simple(fwd.data, inv.data) > 45.0

    def test_inverse_model_requires_coefficients(self):
        rng = np.random.default_rng(7)
        gt = random_image(rng, 16, 16)
        params = centered_params(16, (0.1, 0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            synthesize_distorted(gt, params, mode="inverse_model")

    def test_domain_exceeded(self):
        rng = np.random.default_rng(8)
        gt = random_image(rng, 64, 64)
        # tiny s*f pushes the corner's theta_d past pi/2
        intr = Intrinsics(f=20.0, cx=31.5, cy=31.5)
        params = DistortionParams(k=(0.0, 0.0, 0.0, 0.0), intr=intr, s=1.0)
        with pytest.raises(DomainExceeded):
            synthesize_distorted(gt, params)


class TestFillScale:
    def test_closed_form_at_45_degrees(self):
        # zero coefficients and corner angle pi/4: s = tan(pi/4)/(pi/4) = 4/pi
        size = 65
        r = math.hypot(32.0, 32.0)
        params = centered_params(size, (0.0, 0.0, 0.0, 0.0), f=r)
        s = fill_scale(params, size, size)
        assert math.isclose(s, 4.0 / math.pi, rel_tol=1e-12)

    def test_corner_maps_to_corner(self):
        from barrelwarp.warp import forward_pixel_map

        size = 256
        params = centered_params(size, (0.27, -0.03, 0.01, 0.0))
        s = fill_scale(params, size, size)
        params = DistortionParams(k=params.k, intr=params.intr, s=s)
        xs, ys = forward_pixel_map(params, 0.0, 0.0)
        assert abs(float(xs) - 0.0) < 1e-6
        assert abs(float(ys) - 0.0) < 1e-6

    def test_unit_scale_for_tan_series(self):
        size = 128
        params = centered_params(size, TAN_SERIES, f=2.0 * size)
        s = fill_scale(params, size, size)
        assert abs(s - 1.0) < 1e-3


class TestDownsampleFlow:
    def test_uniform_flow_halves(self):
        flow = np.empty((6, 8, 2), dtype=np.float32)
        flow[..., 0] = 4.0
        flow[..., 1] = 6.0
        out = downsample_flow(FlowField(flow))
        assert out.data.shape == (3, 4, 2)
        assert np.all(out.data[..., 0] == 2.0)
        assert np.all(out.data[..., 1] == 3.0)

    def test_zero_flow_stays_zero(self):
        out = downsample_flow(FlowField(np.zeros((5, 5, 2), dtype=np.float32)))
        assert out.data.shape == (3, 3, 2)
        assert np.all(out.data == 0.0)

    def test_consistent_with_native_half_resolution_flow(self):
        size = 512
        params = centered_params(size, (0.24, -0.01, 0.002, 0.0), f=0.8 * size)
        fine = gt_backward_flow(params, size, size)
        coarse = downsample_flow(fine)
        # halved intrinsics in the pixel-center convention
        intr2 = Intrinsics(
            f=params.intr.f / 2.0, cx=(params.intr.cx - 0.5) / 2.0, cy=(params.intr.cy - 0.5) / 2.0
        )
        params2 = DistortionParams(k=params.k, intr=intr2, s=params.s)
        native = gt_backward_flow(params2, size // 2, size // 2)
        epe = np.mean(np.hypot(*(coarse.data - native.data).transpose(2, 0, 1)))
        assert epe < 0.25, f"mean EPE {epe:.4f}"


class TestImagePyramid:
    def test_constant_preserved(self):
        img = ImageBuffer(np.full((64, 64, 3), 0.37, dtype=np.float32))
        for level in image_pyramid(img, 4):
            assert np.all(level.data == np.float32(0.37))

    def test_level_sizes(self):
        rng = np.random.default_rng(10)
        img = random_image(rng, 256, 256)
        levels = image_pyramid(img, 6)
        assert [lv.width for lv in levels] == [256, 128, 64, 32, 16, 8]
        assert [lv.height for lv in levels] == [256, 128, 64, 32, 16, 8]

    def test_mean_preserved(self):
        rng = np.random.default_rng(11)
        img = random_image(rng, 128, 128)
        means = [float(lv.data.mean()) for lv in image_pyramid(img, 5)]
        for m in means[1:]:
            assert abs(m - means[0]) < 1e-4

    def test_too_small(self):
        rng = np.random.default_rng(12)
        img = random_image(rng, 8, 8)
        with pytest.raises(TooSmall):
            image_pyramid(img, 5)


class TestValidityInvariant:
    def test_valid_pixels_have_interior_sources(self):
        rng = np.random.default_rng(13)
        img = random_image(rng, 32, 32)
        flow = FlowField(rng.uniform(-8, 8, size=(32, 32, 2)).astype(np.float32))
        _, mask = apply_backward_flow(img, flow)
        us, vs = np.meshgrid(np.arange(32.0), np.arange(32.0))
        xs = us + flow.data[..., 0]
        ys = vs + flow.data[..., 1]
        inside = (xs >= 0) & (xs <= 31) & (ys >= 0) & (ys <= 31)
        assert np.array_equal(mask, inside)


def test_image_buffer_validation():
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((4, 4), dtype=np.float32))
    with pytest.raises(ValueError):
        ImageBuffer(np.full((4, 4, 3), 1.5, dtype=np.float32))


def test_flow_field_validation():
    with pytest.raises(ValueError):
        FlowField(np.zeros((4, 4, 3), dtype=np.float32))
    bad = np.zeros((4, 4, 2), dtype=np.float32)
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        FlowField(bad)
