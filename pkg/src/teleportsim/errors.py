"""Exception types raised across the simulator."""


class TeleportSimError(Exception):
    """Base class for all simulator errors."""


class NotNormalized(TeleportSimError):
    """State amplitudes do not satisfy the normalization precondition."""


class BadIndex(TeleportSimError):
    """Photon index outside the valid range, or an empty keep-set."""


class DimensionMismatch(TeleportSimError):
    """Operands act on different numbers of photons."""


class IncompleteProjectorSet(TeleportSimError):
    """Projectors passed to a measurement do not resolve the identity."""


class OutOfRange(TeleportSimError):
    """Scalar parameter outside its allowed interval."""


class ZeroProbability(TeleportSimError):
    """Conditioning on an outcome whose probability is numerically zero."""


class TooManyPairs(TeleportSimError):
    """Exact rate enumeration supports at most two pairs per pump pass."""


class NoSolution(TeleportSimError):
    """Calibration target is unreachable within the allowed parameter range."""


class GridMismatch(TeleportSimError):
    """Two scans cover different delay grids."""


class InsufficientScan(TeleportSimError):
    """Scan lacks the delay points needed for the requested analysis."""


class ConfigError(TeleportSimError):
    """Invalid or unreadable experiment configuration."""
