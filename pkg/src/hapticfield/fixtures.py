"""Synthetic fields and canonical trajectories for tests and benchmarks.

Everything here is deterministic: fields come from closed-form generators
(seeded RNG where noise is wanted) and trajectories are scripted, so replay
runs compare byte-for-byte.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .io import Trajectory, fill_holes
from .surface import DepthField


# ---------------------------------------------------------------------------
# fields


def field_from_function(
    fn: Callable[[float, float], float], width: int, height: int, spacing: float = 1.0
) -> DepthField:
    xs = np.arange(width) * spacing
    ys = np.arange(height) * spacing
    gx, gy = np.meshgrid(xs, ys)
    vec = np.vectorize(fn, otypes=[np.float64])
    return DepthField.from_array(vec(gx, gy), spacing)


def flat_field(value: float = 10.0, size: int = 33, spacing: float = 1.0) -> DepthField:
    return DepthField.from_array(np.full((size, size), float(value)), spacing)


def ramp_field(slope: float = 1.0, size: int = 33, spacing: float = 1.0) -> DepthField:
    xs = np.arange(size) * spacing * slope
    return DepthField.from_array(np.tile(xs, (size, 1)), spacing)


def paraboloid_field(a: float = 0.1, size: int = 65, spacing: float = 0.25) -> DepthField:
    """Bowl z = a * (x^2 + y^2); used for analytic-normal checks."""
    return field_from_function(lambda x, y: a * (x * x + y * y), size, size, spacing)


def dome_field(
    peak: float = 10.0, curvature: float = 0.02, size: int = 33, spacing: float = 1.0
) -> DepthField:
    """Convex dome: the closest-point-optimality workhorse."""
    c = (size - 1) * spacing / 2.0
    return field_from_function(
        lambda x, y: peak - curvature * ((x - c) ** 2 + (y - c) ** 2), size, size, spacing
    )


def sine_field(
    base: float = 5.0,
    amplitude: float = 0.5,
    period: float = 4.0,
    size: int = 65,
    spacing: float = 0.25,
) -> DepthField:
    return field_from_function(
        lambda x, y: base + amplitude * math.sin(2.0 * math.pi * x / period),
        size, size, spacing,
    )


def relief_field(size: int = 800, spacing: float = 1.0, seed: int = 0) -> DepthField:
    """Benchmark terrain: smooth rolling relief plus mild seeded detail."""
    xs = np.arange(size) * spacing
    gx, gy = np.meshgrid(xs, xs)
    base = 10.0 + 2.0 * np.sin(gx * 0.02) * np.cos(gy * 0.017) + 0.8 * np.sin(gx * 0.05 + 1.0)
    rng = np.random.default_rng(seed)
    detail = rng.normal(0.0, 0.05, size=(size, size))
    return DepthField.from_array(base + detail, spacing)


def holed_field(size: int = 33, spacing: float = 1.0, seed: int = 7) -> DepthField:
    """Dome with missing samples, hole-filled at the base plane z_max.

    A disc of holes sits on the slide path (a scan occlusion) and scattered
    single-sample holes cover the rest, so replays cross genuine hole
    regions, not just isolated masked nodes.
    """
    dome = dome_field(size=size, spacing=spacing)
    rng = np.random.default_rng(seed)
    mask = rng.random((size, size)) < 0.05
    cx = 0.45 * (size - 1)
    cy = 0.5 * (size - 1)
    radius = max(2.5, size / 10.0)
    jj, ii = np.mgrid[0:size, 0:size]
    mask |= ((ii - cx) ** 2 + (jj - cy) ** 2) <= radius**2
    raw = DepthField(
        width=size, height=size, spacing=spacing,
        values=dome.values.copy(), hole_mask=mask,
    )
    return fill_holes(raw)


# ---------------------------------------------------------------------------
# trajectories (all in the target field's coordinates)


def free_space_trajectory(field: DepthField, ticks: int = 200) -> Trajectory:
    """A line strictly above the surface: force must stay zero throughout."""
    top = float(field.values.max()) + 2.0
    xs = np.linspace(0.1 * field.extent_x, 0.9 * field.extent_x, ticks)
    ys = np.linspace(0.1 * field.extent_y, 0.9 * field.extent_y, ticks)
    return Trajectory.from_positions(np.stack([xs, ys, np.full(ticks, top)], axis=1))


def descend_hold_trajectory(
    field: DepthField,
    depth: float = 1.0,
    descend_ticks: int = 300,
    hold_ticks: int = 200,
    lateral: tuple[float, float] | None = None,
) -> Trajectory:
    """Vertical approach, press to `depth` below the surface, then freeze.

    The force-versus-time shape is: zero while free, ramping while the HIP
    sinks, constant during the hold once the proxy settles.
    """
    if lateral is None:
        lateral = (field.extent_x / 2.0, field.extent_y / 2.0)
    x, y = lateral
    import hapticfield.surface as _s

    z_surf = _s.sample_depth(field, x, y)
    z_start = float(field.values.max()) + 2.0
    z_end = z_surf - depth
    zs = np.concatenate(
        [np.linspace(z_start, z_end, descend_ticks), np.full(hold_ticks, z_end)]
    )
    n = zs.size
    return Trajectory.from_positions(
        np.stack([np.full(n, x), np.full(n, y), zs], axis=1)
    )


def curved_slide_trajectory(
    field: DepthField,
    depth: float = 0.5,
    descend_ticks: int = 200,
    slide_ticks: int = 400,
    hold_ticks: int = 150,
) -> Trajectory:
    """Descend onto the surface, slide laterally at fixed depth, then freeze.

    On curved fields the force direction swings with the local normal while
    the magnitude stays near k*depth.
    """
    import hapticfield.surface as _s

    x0 = field.extent_x * 0.35
    x1 = field.extent_x * 0.65
    y0 = field.extent_y / 2.0
    z_start = float(field.values.max()) + 2.0
    z0 = _s.sample_depth(field, x0, y0) - depth
    descend = np.stack(
        [
            np.full(descend_ticks, x0),
            np.full(descend_ticks, y0),
            np.linspace(z_start, z0, descend_ticks),
        ],
        axis=1,
    )
    xs = np.linspace(x0, x1, slide_ticks)
    zs = np.array([_s.sample_depth(field, float(x), y0) - depth for x in xs])
    slide = np.stack([xs, np.full(slide_ticks, y0), zs], axis=1)
    hold = np.tile(slide[-1], (hold_ticks, 1))
    return Trajectory.from_positions(np.concatenate([descend, slide, hold]))


def contact_heavy_trajectory(
    field: DepthField, ticks: int = 12_000, depth: float = 0.25, speed: float = 0.02
) -> Trajectory:
    """Benchmark script: smooth descent, then a Lissajous sweep below the surface.

    `speed` is the lateral step per tick in mm (0.02 mm/ms = 20 mm/s hand
    speed); the HIP is in contact for ~98% of the ticks.
    """
    import hapticfield.surface as _s

    cx = field.extent_x / 2.0
    cy = field.extent_y / 2.0
    ax = field.extent_x * 0.3
    ay = field.extent_y * 0.3
    approach = 200
    zs_top = float(field.values.max()) + 1.0
    pos = np.empty((ticks, 3))
    # angular rates sized so the peak lateral velocity is about `speed` per
    # tick (|v| = hypot(ax*wx, ay*wy) at the sweep center)
    wx = 0.76 * speed / ax if ax else 0.0
    wy = 0.53 * speed / ay if ay else 0.0
    for k in range(ticks):
        x = cx + ax * math.sin(wx * k)
        y = cy + ay * math.sin(wy * k + 0.5)
        z_target = _s.sample_depth(field, x, y) - depth
        if k < approach:
            # glide down to the surface instead of teleporting below it
            frac = k / approach
            z = zs_top + (z_target - zs_top) * frac
        else:
            z = z_target
        pos[k] = (x, y, z)
    return Trajectory.from_positions(pos)


def random_walk_trajectory(
    field: DepthField, ticks: int = 50, seed: int = 0, step: float = 0.4
) -> Trajectory:
    """Seeded random HIP walk that wanders above and below the surface."""
    rng = np.random.default_rng(seed)
    zmin = float(field.values.min()) - 1.0
    zmax = float(field.values.max()) + 2.0
    p = np.array(
        [
            rng.uniform(0, field.extent_x),
            rng.uniform(0, field.extent_y),
            rng.uniform(zmin, zmax),
        ]
    )
    out = np.empty((ticks, 3))
    for k in range(ticks):
        p = p + rng.uniform(-step, step, size=3)
        p[0] = min(max(p[0], 0.0), field.extent_x)
        p[1] = min(max(p[1], 0.0), field.extent_y)
        p[2] = min(max(p[2], zmin), zmax)
        out[k] = p
    return Trajectory.from_positions(out)
