"""Mapping between model coordinates, pyramid ROI windows, and the haptic workspace.

A region of interest is a lateral window of one pyramid level.  Loading it
into the fixed haptic workspace (a 4-inch cube by default, 101.6 mm) fits
the window's larger lateral extent to the cube and scales depth by the same
factor, so surface slopes, and with them force directions, survive the zoom
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import RoiSelectionError
from .pyramid import DepthPyramid
from .surface import DepthField, Vec3

WORKSPACE_EXTENT_MM = 101.6  # 4-inch cube of active space
DEFAULT_ROI_NODES = 200      # window side used when zooming without an explicit size


@dataclass(frozen=True)
class RoiSelection:
    """Pyramid level plus a lateral window in that level's node coordinates."""

    level: int
    x: int
    y: int
    w: int
    h: int

    def validate(self, pyramid: DepthPyramid) -> None:
        if not (0 <= self.level < pyramid.n_levels):
            raise RoiSelectionError(
                f"level {self.level} outside pyramid (0..{pyramid.n_levels - 1})"
            )
        grid = pyramid.levels[self.level]
        if self.w < 2 or self.h < 2:
            raise RoiSelectionError(f"window must be at least 2x2 nodes, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0 or self.x + self.w > grid.width or self.y + self.h > grid.height:
            raise RoiSelectionError(
                f"window ({self.x},{self.y})+{self.w}x{self.h} exceeds level "
                f"{self.level} grid {grid.width}x{grid.height}"
            )


def full_selection(pyramid: DepthPyramid, level: int | None = None) -> RoiSelection:
    """The whole grid of a level (coarsest by default)."""
    if level is None:
        level = pyramid.n_levels - 1
    grid = pyramid.levels[level]
    return RoiSelection(level=level, x=0, y=0, w=grid.width, h=grid.height)


@dataclass(frozen=True)
class WorkspaceMapping:
    """Scale factors from model mm into workspace mm.

    depth_gain equals lateral_scale (isotropic zoom): the mapped surface
    keeps its slopes, so the rendered force direction is scale-invariant.
    """

    lateral_scale: float
    depth_gain: float
    workspace_extent: float = WORKSPACE_EXTENT_MM

    def __post_init__(self):
        if self.lateral_scale <= 0.0 or self.depth_gain <= 0.0 or self.workspace_extent <= 0.0:
            raise ValueError("mapping scales must be positive")


def select_roi(
    pyramid: DepthPyramid,
    sel: RoiSelection,
    workspace_extent: float = WORKSPACE_EXTENT_MM,
) -> tuple[DepthField, WorkspaceMapping]:
    """Cut the window out of its level and fit it to the workspace cube.

    Returns an independent sub-grid (model units) and the mapping whose
    lateral_scale makes the window's larger lateral extent exactly span the
    cube.
    """
    sel.validate(pyramid)
    grid = pyramid.levels[sel.level]
    sub_values = grid.values[sel.y : sel.y + sel.h, sel.x : sel.x + sel.w].copy()
    sub_mask = grid.hole_mask[sel.y : sel.y + sel.h, sel.x : sel.x + sel.w].copy()
    sub = DepthField(
        width=sel.w,
        height=sel.h,
        spacing=grid.spacing,
        values=sub_values,
        hole_mask=sub_mask,
        z_max=grid.z_max,
    )
    span = max((sel.w - 1) * grid.spacing, (sel.h - 1) * grid.spacing)
    scale = workspace_extent / span
    return sub, WorkspaceMapping(
        lateral_scale=scale, depth_gain=scale, workspace_extent=workspace_extent
    )


def model_to_workspace(
    p: Sequence[float], mapping: WorkspaceMapping, window_origin: Sequence[float]
) -> Vec3:
    """Model mm -> workspace mm: translate by the window origin, then scale."""
    return (
        (p[0] - window_origin[0]) * mapping.lateral_scale,
        (p[1] - window_origin[1]) * mapping.lateral_scale,
        p[2] * mapping.depth_gain,
    )


def workspace_to_model(
    p: Sequence[float], mapping: WorkspaceMapping, window_origin: Sequence[float]
) -> Vec3:
    """Inverse of model_to_workspace; the round trip is identity to 1e-9 mm."""
    return (
        p[0] / mapping.lateral_scale + window_origin[0],
        p[1] / mapping.lateral_scale + window_origin[1],
        p[2] / mapping.depth_gain,
    )


def to_workspace_field(field: DepthField, mapping: WorkspaceMapping) -> DepthField:
    """Re-express a model-unit grid in workspace units.

    Spacing picks up lateral_scale and heights pick up depth_gain; with the
    two equal, every surface slope is preserved exactly.
    """
    return DepthField(
        width=field.width,
        height=field.height,
        spacing=field.spacing * mapping.lateral_scale,
        values=field.values * mapping.depth_gain,
        hole_mask=field.hole_mask.copy(),
        z_max=None if field.z_max is None else field.z_max * mapping.depth_gain,
    )
