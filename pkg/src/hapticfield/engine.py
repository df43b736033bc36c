"""Engine session: the tick owner that the service and harness drive.

One session owns one HapticState and the currently loaded ROI.  Commands
(HIP targets, ROI switches, level steps) are queued and applied between
ticks by the single tick owner, so no tick ever sees a half-switched
field/mapping pair; observers get immutable snapshots stamped with a
mapping version.  The session works in workspace coordinates: the selected
window is re-expressed in workspace units when it is loaded, which keeps
delta_n and the stiffness device-scale quantities.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import RoiSelectionError
from .pyramid import DepthPyramid, build_pyramid
from .renderer import HapticState, RenderParams, tick
from .surface import DepthField, Vec3
from .workspace import (
    DEFAULT_ROI_NODES,
    WORKSPACE_EXTENT_MM,
    RoiSelection,
    full_selection,
    model_to_workspace,
    select_roi,
    to_workspace_field,
    workspace_to_model,
)

_STATS_WINDOW = 1000


@dataclass(frozen=True)
class Snapshot:
    """Published engine state; everything in workspace mm / N."""

    seq: int
    t_ms: int
    hip: Vec3
    proxy: Vec3
    force: Vec3
    in_contact: bool
    converged: bool
    roi: RoiSelection
    mapping_version: int
    tick_mean_us: float
    tick_p99_us: float

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "t_ms": self.t_ms,
            "hip": list(self.hip),
            "proxy": list(self.proxy),
            "force": list(self.force),
            "in_contact": self.in_contact,
            "converged": self.converged,
            "roi": {
                "level": self.roi.level,
                "x": self.roi.x,
                "y": self.roi.y,
                "w": self.roi.w,
                "h": self.roi.h,
            },
            "mapping_version": self.mapping_version,
            "tick_mean_us": self.tick_mean_us,
            "tick_p99_us": self.tick_p99_us,
        }


class EngineSession:
    """Single-owner haptic loop over a pyramid, steered by queued commands.

    Not thread-safe by design: exactly one caller drives tick_once(); the
    command setters only append to queues/slots consumed at tick boundaries,
    and snapshots hand out immutable data.
    """

    def __init__(
        self,
        pyramid: DepthPyramid,
        params: Optional[RenderParams] = None,
        workspace_extent: float = WORKSPACE_EXTENT_MM,
        roi: Optional[RoiSelection] = None,
        hip_interp_ticks: int = 16,
    ):
        self.pyramid = pyramid
        self.params = params or RenderParams()
        self.workspace_extent = workspace_extent
        self.hip_interp_ticks = max(1, hip_interp_ticks)

        self.t_ms = 0
        self.seq = 0
        self.mapping_version = 0
        self.last_switch_us: Optional[float] = None
        self._durations: deque = deque(maxlen=_STATS_WINDOW)
        self._overruns = 0

        self._pending_roi: deque = deque()
        self._hip_target: Optional[Vec3] = None
        self._hip_step: Optional[Vec3] = None

        sel = roi if roi is not None else full_selection(pyramid)
        ok = self._apply_roi(sel)
        if not ok:
            raise RoiSelectionError(f"initial selection invalid: {sel}")

    # -- ROI handling -------------------------------------------------------

    def _load_roi(self, sel: RoiSelection):
        sub, mapping = select_roi(self.pyramid, sel, self.workspace_extent)
        active = to_workspace_field(sub, mapping)
        level = self.pyramid.levels[sel.level]
        origin = (sel.x * level.spacing, sel.y * level.spacing)
        return sub, mapping, active, origin

    def _park_position(self, active: DepthField) -> Vec3:
        z_top = active.z_max if active.z_max is not None else float(active.values.max())
        return (
            active.extent_x / 2.0,
            active.extent_y / 2.0,
            z_top + 0.1 * self.workspace_extent,
        )

    def _apply_roi(self, sel: RoiSelection) -> bool:
        t0 = time.perf_counter_ns()
        try:
            sub, mapping, active, origin = self._load_roi(sel)
        except RoiSelectionError:
            return False
        active._flat  # build the hot-path cache now, inside the switch window

        if self.mapping_version > 0:
            # keep the HIP where it physically is when the old position maps
            # inside the new window, else park it above the window center
            model = workspace_to_model(self.state.hip, self.mapping, self.origin_mm)
            x0, y0 = origin
            x1 = x0 + (sel.w - 1) * self.pyramid.levels[sel.level].spacing
            y1 = y0 + (sel.h - 1) * self.pyramid.levels[sel.level].spacing
            if x0 <= model[0] <= x1 and y0 <= model[1] <= y1:
                hip = model_to_workspace(model, mapping, origin)
            else:
                hip = self._park_position(active)
        else:
            hip = self._park_position(active)

        self.roi = sel
        self.field = active
        self.model_field = sub
        self.mapping = mapping
        self.origin_mm = origin
        self.mapping_version += 1
        # proxy resets to the HIP; contact and force re-form on the next tick
        self.state = HapticState(hip=hip, proxy=hip)
        self._hip_target = None
        self._hip_step = None
        self.last_switch_us = (time.perf_counter_ns() - t0) / 1000.0
        return True

    def switch_roi(self, sel: RoiSelection) -> bool:
        """Validate and atomically switch; invalid selections leave state as-is."""
        try:
            sel.validate(self.pyramid)
        except RoiSelectionError:
            return False
        return self._apply_roi(sel)

    def step_level(self, delta: int) -> bool:
        """Move one level coarser (+1) or finer (-1), keeping the window center.

        The window extent in nodes carries over (clamped to the level), which
        doubles/halves the zoom per step.
        """
        new_level = self.roi.level + delta
        if not (0 <= new_level < self.pyramid.n_levels):
            return False
        cur_level = self.pyramid.levels[self.roi.level]
        new_grid = self.pyramid.levels[new_level]
        cx = (self.roi.x + self.roi.w / 2.0) * cur_level.spacing
        cy = (self.roi.y + self.roi.h / 2.0) * cur_level.spacing
        w = min(self.roi.w if self.roi.w < new_grid.width else DEFAULT_ROI_NODES, new_grid.width)
        h = min(self.roi.h if self.roi.h < new_grid.height else DEFAULT_ROI_NODES, new_grid.height)
        x = int(round(cx / new_grid.spacing - w / 2.0))
        y = int(round(cy / new_grid.spacing - h / 2.0))
        x = min(max(x, 0), new_grid.width - w)
        y = min(max(y, 0), new_grid.height - h)
        return self.switch_roi(RoiSelection(level=new_level, x=x, y=y, w=w, h=h))

    # -- commands ------------------------------------------------------------

    def set_hip(self, target: Sequence[float]) -> None:
        """Latest-wins HIP command; interpolated linearly across coming ticks."""
        tgt = (float(target[0]), float(target[1]), float(target[2]))
        cur = self.state.hip
        n = self.hip_interp_ticks
        self._hip_target = tgt
        self._hip_step = (
            (tgt[0] - cur[0]) / n,
            (tgt[1] - cur[1]) / n,
            (tgt[2] - cur[2]) / n,
        )

    def queue_roi(self, sel: RoiSelection) -> None:
        self._pending_roi.append(("roi", sel))

    def queue_level(self, delta: int) -> None:
        self._pending_roi.append(("level", delta))

    # -- ticking -------------------------------------------------------------

    def _next_hip(self) -> Vec3:
        tgt = self._hip_target
        if tgt is None:
            return self.state.hip
        cur = self.state.hip
        step = self._hip_step
        rem = math.dist(cur, tgt)
        step_len = math.sqrt(step[0] ** 2 + step[1] ** 2 + step[2] ** 2)
        if rem <= step_len or step_len == 0.0:
            self._hip_target = None
            self._hip_step = None
            return tgt
        return (cur[0] + step[0], cur[1] + step[1], cur[2] + step[2])

    def tick_once(self) -> None:
        """Apply queued commands, then advance the loop by one millisecond."""
        while self._pending_roi:
            kind, arg = self._pending_roi.popleft()
            if kind == "roi":
                self.switch_roi(arg)
            else:
                self.step_level(arg)
        hip = self._next_hip()
        self.state, dur = tick(self.state, hip, self.field, self.params)
        self._durations.append(dur)
        if dur > self.params.tick_budget_us:
            self._overruns += 1
        self.t_ms += 1

    def run_ticks(self, n: int) -> None:
        for _ in range(n):
            self.tick_once()

    # -- observation ----------------------------------------------------------

    @property
    def overrun_count(self) -> int:
        return self._overruns

    def snapshot(self) -> Snapshot:
        self.seq += 1
        if self._durations:
            d = np.asarray(self._durations)
            mean = float(d.mean())
            p99 = float(np.percentile(d, 99))
        else:
            mean = p99 = 0.0
        return Snapshot(
            seq=self.seq,
            t_ms=self.t_ms,
            hip=self.state.hip,
            proxy=self.state.proxy,
            force=self.state.force,
            in_contact=self.state.in_contact,
            converged=self.state.converged,
            roi=self.roi,
            mapping_version=self.mapping_version,
            tick_mean_us=mean,
            tick_p99_us=p99,
        )


def session_from_field(
    field: DepthField,
    params: Optional[RenderParams] = None,
    n_levels: int = 3,
    **kwargs,
) -> EngineSession:
    """Convenience: build the deepest feasible pyramid (up to n_levels) and start."""
    levels = 1
    w, h = field.width, field.height
    while levels < n_levels and w >= 5 and h >= 5:
        w = (w - 1) // 2 + 1
        h = (h - 1) // 2 + 1
        levels += 1
    return EngineSession(build_pyramid(field, levels), params=params, **kwargs)
