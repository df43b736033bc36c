"""Continuous queries over a sampled height field (a Monge surface z = f(x, y)).

Heights live on a regular lattice: node (i, j) sits at (i*spacing, j*spacing)
and stores the surface height above the reference plane z = 0.  Between nodes
the surface is the bilinear interpolant of the enclosing cell, so every query
here (height, normal, penetration, ray crossing) is answered against that
interpolated surface, not against some smoothed stand-in.

A DepthField is immutable after construction.  The haptic tick, the session
service, and the replay harness all read the same field concurrently without
locks; every function in this module is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSegmentError, OutsideExtentError

Vec3 = tuple[float, float, float]

# Bracket refinement targets for ray crossings. The parameter bracket is
# narrowed below PARAM_TOL_MM, then the height residual is polished to
# G_TOL_MM so that spring forces derived from crossing points are exact to
# well below a nano-Newton.
PARAM_TOL_MM = 1e-4
G_TOL_MM = 1e-12
_MAX_REFINE = 80


@dataclass(frozen=True)
class DepthField:
    """Regular grid of surface heights in mm.

    values is row-major (height, width); hole_mask marks cells with no real
    sample (True = missing).  z_max is the base-plane fill height used by
    hole filling; when None it defaults to the maximum non-hole value at
    fill time.
    """

    width: int
    height: int
    spacing: float
    values: np.ndarray
    hole_mask: np.ndarray
    z_max: Optional[float] = None

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.width}x{self.height}")
        if not (self.spacing > 0.0) or not math.isfinite(self.spacing):
            raise ValueError(f"spacing must be positive and finite, got {self.spacing}")
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {values.shape} does not match {self.height}x{self.width}"
            )
        if not np.isfinite(values).all():
            raise ValueError("grid heights must all be finite")
        mask = np.ascontiguousarray(self.hole_mask, dtype=bool)
        if mask.shape != (self.height, self.width):
            raise ValueError(
                f"hole_mask shape {mask.shape} does not match {self.height}x{self.width}"
            )
        if self.z_max is not None and not math.isfinite(self.z_max):
            raise ValueError("z_max must be finite")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "hole_mask", mask)

    @classmethod
    def from_array(
        cls,
        values,
        spacing: float,
        hole_mask=None,
        z_max: Optional[float] = None,
    ) -> "DepthField":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D array")
        h, w = values.shape
        if hole_mask is None:
            hole_mask = np.zeros((h, w), dtype=bool)
        return cls(width=w, height=h, spacing=float(spacing), values=values,
                   hole_mask=hole_mask, z_max=z_max)

    @property
    def extent_x(self) -> float:
        """Lateral extent along x in mm: queries are valid on [0, extent_x]."""
        return (self.width - 1) * self.spacing

    @property
    def extent_y(self) -> float:
        return (self.height - 1) * self.spacing

    @cached_property
    def _flat(self) -> list:
        # Plain-float row-major copy for the per-tick hot path; list indexing
        # beats ndarray scalar access by ~5x in CPython.
        return self.values.ravel().tolist()

    def has_holes(self) -> bool:
        return bool(self.hole_mask.any())


def _check_extent(field: DepthField, x: float, y: float) -> None:
    if not (0.0 <= x <= field.extent_x and 0.0 <= y <= field.extent_y):
        raise OutsideExtentError(
            f"query ({x}, {y}) outside extent [0, {field.extent_x}] x [0, {field.extent_y}]"
        )


def sample_depth(field: DepthField, x: float, y: float) -> float:
    """Bilinear height at lateral position (x, y) in mm.

    Cells own their lower/left edges ([i, i+1) half-open); the last cell is
    closed so the far boundary is still sampleable.  Queries outside the
    extent raise OutsideExtentError: clamping is the caller's decision.
    """
    _check_extent(field, x, y)
    s = field.spacing
    u = x / s
    v = y / s
    i = int(u)
    j = int(v)
    if i > field.width - 2:
        i = field.width - 2
    if j > field.height - 2:
        j = field.height - 2
    fx = u - i
    fy = v - j
    flat = field._flat
    base = j * field.width + i
    z00 = flat[base]
    z10 = flat[base + 1]
    z01 = flat[base + field.width]
    z11 = flat[base + field.width + 1]
    return (z00 * (1.0 - fx) + z10 * fx) * (1.0 - fy) + (z01 * (1.0 - fx) + z11 * fx) * fy


@dataclass(frozen=True)
class SurfacePoint:
    """A point on the rendered surface with its outward unit normal."""

    position: Vec3
    normal: Vec3

    def __post_init__(self):
        n = self.normal
        if abs(math.sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) - 1.0) > 1e-9:
            raise ValueError(f"normal must be unit length, got {n}")
        if n[2] <= 0.0:
            raise ValueError("surface normals point up out of the height field")


def surface_point(field: DepthField, x: float, y: float) -> SurfacePoint:
    """The surface position over (x, y) together with its normal."""
    return SurfacePoint(
        position=(x, y, sample_depth(field, x, y)),
        normal=surface_normal(field, x, y),
    )


def surface_normal(field: DepthField, x: float, y: float) -> Vec3:
    """Unit outward normal of the bilinear patch containing (x, y).

    n = normalize(-df/dx, -df/dy, 1), using the analytic gradient of the
    patch, so it is the normal of the surface actually rendered.  The
    z-component is always strictly positive.
    """
    _check_extent(field, x, y)
    s = field.spacing
    u = x / s
    v = y / s
    i = int(u)
    j = int(v)
    if i > field.width - 2:
        i = field.width - 2
    if j > field.height - 2:
        j = field.height - 2
    fx = u - i
    fy = v - j
    flat = field._flat
    base = j * field.width + i
    z00 = flat[base]
    z10 = flat[base + 1]
    z01 = flat[base + field.width]
    z11 = flat[base + field.width + 1]
    gx = ((z10 - z00) * (1.0 - fy) + (z11 - z01) * fy) / s
    gy = ((z01 - z00) * (1.0 - fx) + (z11 - z10) * fx) / s
    inv = 1.0 / math.sqrt(gx * gx + gy * gy + 1.0)
    return (-gx * inv, -gy * inv, inv)


def is_penetrating(field: DepthField, p: Sequence[float]) -> bool:
    """True iff the point is strictly below the interpolated surface."""
    return p[2] < sample_depth(field, p[0], p[1])


def _clip_lateral(field: DepthField, ox: float, oy: float, dx: float, dy: float) -> float:
    """Largest t in [0, 1] such that (ox, oy) + t*(dx, dy) stays in extent."""
    t_end = 1.0
    for o, d, hi in ((ox, dx, field.extent_x), (oy, dy, field.extent_y)):
        if d > 0.0:
            t = (hi - o) / d
            if t < t_end:
                t_end = t
        elif d < 0.0:
            t = -o / d
            if t < t_end:
                t_end = t
    return t_end if t_end > 0.0 else 0.0


def ray_surface_intersect(
    field: DepthField,
    origin: Sequence[float],
    target: Sequence[float],
    step: float = 0.1,
) -> Optional[Vec3]:
    """First crossing of the segment origin->target with the surface.

    Marches from the origin in increments of at most `step` mm looking for a
    sign change of g = z - f(x, y), then refines the bracketing interval
    (bisection to PARAM_TOL_MM, then bracketed secant down to G_TOL_MM so
    downstream force arithmetic stays exact).  The returned point is taken
    on the non-penetrating side of the bracket, so it never lies below the
    surface.  Returns None when g never goes negative along the (laterally
    clipped) segment.  The origin must be non-penetrating.
    """
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    ox, oy, oz = float(origin[0]), float(origin[1]), float(origin[2])
    tx, ty, tz = float(target[0]), float(target[1]), float(target[2])
    dx = tx - ox
    dy = ty - oy
    dz = tz - oz
    length = math.sqrt(dx * dx + dy * dy + dz * dz)
    if length == 0.0:
        raise DegenerateSegmentError("segment has zero length")
    _check_extent(field, ox, oy)

    g0 = oz - sample_depth(field, ox, oy)
    if g0 < 0.0:
        raise ValueError("ray origin is below the surface")

    t_end = _clip_lateral(field, ox, oy, dx, dy)
    if t_end == 0.0:
        return None

    ex = field.extent_x
    ey = field.extent_y

    def g_at(t: float) -> float:
        x = ox + dx * t
        y = oy + dy * t
        # the clip can leave the endpoint a few ulp outside; pin it back
        if x < 0.0:
            x = 0.0
        elif x > ex:
            x = ex
        if y < 0.0:
            y = 0.0
        elif y > ey:
            y = ey
        return (oz + dz * t) - sample_depth(field, x, y)

    n_steps = max(1, math.ceil(length * t_end / step))
    t_lo = 0.0
    g_lo = g0
    t_hi = None
    g_hi = 0.0
    for k in range(1, n_steps + 1):
        t = t_end * k / n_steps
        g = g_at(t)
        if g < 0.0:
            t_hi = t
            g_hi = g
            break
        t_lo = t
        g_lo = g
    if t_hi is None:
        return None

    # bisection to the parameter tolerance
    tol_t = PARAM_TOL_MM / length
    while t_hi - t_lo > tol_t:
        mid = 0.5 * (t_lo + t_hi)
        g = g_at(mid)
        if g < 0.0:
            t_hi = mid
            g_hi = g
        else:
            t_lo = mid
            g_lo = g

    # bracketed secant polish on the height residual, with a bisection step
    # interleaved so the bracket keeps shrinking even when the secant
    # stagnates on one side
    for it in range(_MAX_REFINE):
        if g_lo <= G_TOL_MM or (t_hi - t_lo) * length <= 1e-12:
            break
        denom = g_lo - g_hi
        if it % 2 == 0 and denom > 0.0:
            t = t_lo + g_lo * (t_hi - t_lo) / denom
            if not (t_lo < t < t_hi):
                t = 0.5 * (t_lo + t_hi)
        else:
            t = 0.5 * (t_lo + t_hi)
        g = g_at(t)
        if g < 0.0:
            t_hi = t
            g_hi = g
        else:
            t_lo = t
            g_lo = g

    t = t_lo
    x = ox + dx * t
    y = oy + dy * t
    if x < 0.0:
        x = 0.0
    elif x > ex:
        x = ex
    if y < 0.0:
        y = 0.0
    elif y > ey:
        y = ey
    return (x, y, oz + dz * t)
