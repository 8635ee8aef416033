"""Barrel-distortion synthesis, backward warping flows, rectification, and scoring."""

from .errors import (
    BadMagic,
    BarrelWarpError,
    DimensionMismatch,
    DomainExceeded,
    EmptyInput,
    InvalidParams,
    IoFailure,
    NoConvergence,
    NonMonotonic,
    ParseError,
    SamplingExhausted,
    TooSmall,
    TruncatedFile,
    UnsupportedFormat,
)
from .geometry import (
    CoefficientRanges,
    DistortionParams,
    Intrinsics,
    NormalizedPoint,
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

__version__ = "0.1.0"
