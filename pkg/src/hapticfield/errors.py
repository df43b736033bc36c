"""Exception types shared across the package."""


class HapticFieldError(Exception):
    """Base class for all package errors."""


class OutsideExtentError(HapticFieldError, ValueError):
    """A lateral query fell outside the grid's sampled extent."""


class DegenerateSegmentError(HapticFieldError, ValueError):
    """A ray/segment operation received a zero-length segment."""


class GridSizeError(HapticFieldError, ValueError):
    """A grid is too small for the requested operation."""


class GridParseError(HapticFieldError, ValueError):
    """A grid or trace file failed to parse; message carries line/offset."""


class EmptyFieldError(HapticFieldError, ValueError):
    """No usable samples (all points outside the grid, or all cells holes)."""


class RoiSelectionError(HapticFieldError, ValueError):
    """A region-of-interest selection does not fit the pyramid level."""


class TrajectoryError(HapticFieldError, ValueError):
    """A trajectory violates the consecutive-millisecond timeline."""
