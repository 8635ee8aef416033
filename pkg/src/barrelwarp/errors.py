"""Exception types raised across the toolkit."""


class BarrelWarpError(Exception):
    """Base class for all toolkit errors."""


class InvalidParams(BarrelWarpError):
    """Distortion parameters fail the monotonicity check for the requested frame."""


class NonMonotonic(BarrelWarpError):
    """Bracketing interval for the angle inversion shows a sign anomaly."""


class NoConvergence(BarrelWarpError):
    """Angle inversion did not reach the residual tolerance within budget."""


class SamplingExhausted(BarrelWarpError):
    """Parameter sampler rejected too many draws without finding a valid set."""


class DomainExceeded(BarrelWarpError):
    """A distorted angle reached or passed pi/2 inside the frame."""


class DimensionMismatch(BarrelWarpError):
    """Paired inputs (images, flows, masks) have different dimensions."""


class TooSmall(BarrelWarpError):
    """Input is below the minimum size for this operation."""


class EmptyInput(BarrelWarpError):
    """No readable input images were found."""


class BadMagic(BarrelWarpError):
    """Flow file does not start with the expected magic bytes."""


class TruncatedFile(BarrelWarpError):
    """Flow file ends before the declared payload is complete."""


class ParseError(BarrelWarpError):
    """Manifest line failed to parse; `line` is the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsupportedFormat(BarrelWarpError):
    """Image file is in a mode or format this toolkit does not accept."""


class IoFailure(BarrelWarpError):
    """Underlying OS-level read or write failed."""
