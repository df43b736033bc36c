"""Gaussian multiresolution pyramid of depth grids.

Each level halves the resolution of the previous one: a 5x5 weighted average
(separable generating kernel, a = 0.4) is taken around every second node,
with out-of-range taps clamped to the border.  Low-pass filtering before the
2x decimation keeps aliasing (and the haptic instability it causes) out of
the coarse levels.  Reduction assumes hole-filled input so the fill height
participates in the averaging; fill holes before building a pyramid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridSizeError
from .surface import DepthField

# 1-D generating weights with a = 0.4; the canonical low-pass choice for
# 2x pyramid reduction
GENERATING_WEIGHTS = (0.05, 0.25, 0.40, 0.25, 0.05)


def gaussian_kernel() -> np.ndarray:
    """5x5 separable smoothing kernel: outer product of the 1-D weights."""
    w = np.asarray(GENERATING_WEIGHTS, dtype=np.float64)
    return np.outer(w, w)


def reduced_dim(dim: int) -> int:
    """Output side length after one reduction: (dim - 1) // 2 + 1."""
    return (dim - 1) // 2 + 1


def reduce_level(field: DepthField) -> DepthField:
    """One pyramid reduction: filter with the 5x5 kernel, keep every 2nd node.

    Output node (i, j) averages input nodes (2i + m, 2j + n) for m, n in
    [-2, 2], clamping indices at the borders.  Output spacing doubles.
    """
    if field.width < 5 or field.height < 5:
        raise GridSizeError(
            f"reduction needs at least 5x5, got {field.width}x{field.height}"
        )
    out_w = reduced_dim(field.width)
    out_h = reduced_dim(field.height)
    padded = np.pad(field.values, 2, mode="edge")
    # carry the center tap exactly and weight only deviations from it: the
    # kernel weights sum to 1 only up to rounding, so a constant field would
    # otherwise drift by an ulp
    center = padded[2 : 2 + 2 * out_h - 1 : 2, 2 : 2 + 2 * out_w - 1 : 2]
    acc = np.zeros((out_h, out_w), dtype=np.float64)
    w = GENERATING_WEIGHTS
    for a in range(5):
        row = padded[a : a + 2 * out_h - 1 : 2]
        for b in range(5):
            acc += (w[a] * w[b]) * (row[:, b : b + 2 * out_w - 1 : 2] - center)
    return DepthField.from_array(
        center + acc, spacing=2.0 * field.spacing, z_max=field.z_max
    )


@dataclass(frozen=True)
class DepthPyramid:
    """Ordered depth grids: levels[0] is the original, levels[l] is l-times reduced."""

    levels: tuple[DepthField, ...]
    kernel: np.ndarray

    def __post_init__(self):
        k = np.ascontiguousarray(self.kernel, dtype=np.float64)
        if k.shape != (5, 5) or (k < 0).any() or abs(k.sum() - 1.0) > 1e-12:
            raise ValueError("kernel must be 5x5, non-negative, and sum to 1")
        if not np.allclose(k, k.T) or not np.allclose(k, k[::-1, ::-1]):
            raise ValueError("kernel must be symmetric")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)
        if not self.levels:
            raise ValueError("pyramid needs at least one level")

    @property
    def n_levels(self) -> int:
        return len(self.levels)


def build_pyramid(field: DepthField, n_levels: int) -> DepthPyramid:
    """Repeatedly reduce `field` into an n_levels pyramid (level 0 = input)."""
    if n_levels < 1:
        raise ValueError(f"n_levels must be >= 1, got {n_levels}")
    levels = [field]
    for l in range(1, n_levels):
        prev = levels[-1]
        if prev.width < 5 or prev.height < 5:
            raise GridSizeError(
                f"cannot build level {l}: level {l - 1} is only "
                f"{prev.width}x{prev.height}, need at least 5x5"
            )
        levels.append(reduce_level(prev))
    return DepthPyramid(levels=tuple(levels), kernel=gaussian_kernel())
