"""Trajectory replay, phase verification, and tick-latency benchmarking.

Replays drive the engine one tick per trajectory sample; timestamps advance
1 ms logically while ticks run as fast as the machine allows, so benchmarks
measure headroom against the 1 kHz budget instead of idling.  Replayed
traces are deterministic (the tick_us column is left at zero; wall-clock
measurements live in LatencyStats) so two runs of the same fixture produce
byte-identical files.
"""

from __future__ import annotations

import gc
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import TrajectoryError
from .io import ForceTrace, Trajectory, TraceSample
from .renderer import RenderParams, initial_state, tick
from .surface import DepthField


@dataclass(frozen=True)
class LatencyStats:
    """Aggregate tick durations in microseconds."""

    mean_us: float
    p50_us: float
    p99_us: float
    max_us: float
    overrun_count: int
    ticks: int

    def as_dict(self) -> dict:
        return {
            "mean_us": self.mean_us,
            "p50_us": self.p50_us,
            "p99_us": self.p99_us,
            "max_us": self.max_us,
            "overrun_count": self.overrun_count,
            "ticks": self.ticks,
        }


_EMPTY_STATS = LatencyStats(0.0, 0.0, 0.0, 0.0, 0, 0)


def _require_consecutive(trajectory: Trajectory) -> None:
    if len(trajectory) and not trajectory.is_consecutive():
        raise TrajectoryError("trajectory timestamps must be consecutive milliseconds")


def _require_hole_filled(field: DepthField) -> None:
    mask = field.hole_mask
    if not mask.any():
        return
    if field.z_max is None or not (field.values[mask] == field.z_max).all():
        raise ValueError("field has unfilled holes; run fill_holes before replaying")


def _drive(field: DepthField, trajectory: Trajectory, params: RenderParams,
           durations: Optional[list] = None) -> list[TraceSample]:
    positions = trajectory.positions
    times = trajectory.t_ms.tolist()
    if len(trajectory) == 0:
        return []
    state = initial_state(positions[0])
    samples = []
    collect = durations is not None
    for idx in range(len(times)):
        p = positions[idx]
        state, dur = tick(state, (p[0], p[1], p[2]), field, params)
        if collect:
            durations.append(dur)
        samples.append(
            TraceSample(
                t_ms=times[idx],
                hip=state.hip,
                proxy=state.proxy,
                force=state.force,
                in_contact=state.in_contact,
            )
        )
    return samples


def run_trajectory(field: DepthField, trajectory: Trajectory, params: RenderParams) -> ForceTrace:
    """Replay a scripted HIP path: one tick per sample, deterministic trace."""
    _require_consecutive(trajectory)
    _require_hole_filled(field)
    return ForceTrace(samples=tuple(_drive(field, trajectory, params)))


def benchmark_latency(
    field: DepthField, trajectory: Trajectory, params: RenderParams, repeats: int = 1
) -> LatencyStats:
    """Measure tick wall times over `repeats` replays (plus one warm-up pass).

    The warm-up run is excluded from the stats; it absorbs one-time costs
    (grid flattening, allocator warm-up).  GC is paused during measurement
    so collection pauses do not masquerade as engine overruns.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    _require_consecutive(trajectory)
    _require_hole_filled(field)
    if len(trajectory) == 0:
        return _EMPTY_STATS
    _drive(field, trajectory, params)  # warm-up, excluded
    durations: list[float] = []
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repeats):
            _drive(field, trajectory, params, durations=durations)
    finally:
        if was_enabled:
            gc.enable()
    d = np.asarray(durations)
    return LatencyStats(
        mean_us=float(d.mean()),
        p50_us=float(np.percentile(d, 50)),
        p99_us=float(np.percentile(d, 99)),
        max_us=float(d.max()),
        overrun_count=int((d > params.tick_budget_us).sum()),
        ticks=int(d.size),
    )


# ---------------------------------------------------------------------------
# phase structure of descend / slide / hold interactions


@dataclass(frozen=True)
class PhaseReport:
    """Outcome of the free / contact / hold partition checks.

    Segments are half-open [start, end) tick-index ranges; a segment is None
    when the trace never enters it (a script that never touches the surface
    reports only the free phase).
    """

    free: Optional[tuple[int, int]]
    contact: Optional[tuple[int, int]]
    hold: Optional[tuple[int, int]]
    settle_ticks: Optional[int]
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def check_phases(trace: ForceTrace, params: RenderParams | None = None) -> PhaseReport:
    """Verify the canonical force-versus-time structure of a replay.

    Free phase (before first contact): force identically zero.  Contact
    phase: the proxy moves continuously, never jumping more than
    2*max_iters*delta_n in one tick.  Hold phase (HIP frozen at the tail of
    the script): the proxy goes stationary within 10 ticks and stays within
    eps_converge per tick after that.
    """
    if params is None:
        params = RenderParams()
    n = len(trace)
    failures: list[str] = []
    if n == 0:
        return PhaseReport(None, None, None, None, ("empty trace",))

    contact_flags = [s.in_contact for s in trace.samples]
    first_contact = next((i for i, c in enumerate(contact_flags) if c), None)

    hips = trace.hips()
    hold_start = n
    last = hips[-1]
    for i in range(n - 1, -1, -1):
        if not np.array_equal(hips[i], last):
            break
        hold_start = i
    # a "hold" needs at least two frozen samples to be meaningful
    if hold_start >= n - 1:
        hold_start = n

    free_end = n if first_contact is None else first_contact
    free = (0, free_end) if free_end > 0 else None
    for i in range(free_end):
        if trace.samples[i].force != (0.0, 0.0, 0.0):
            failures.append(f"free phase: nonzero force at tick {i}")
            break

    if first_contact is None:
        return PhaseReport(free, None, None, None, tuple(failures))

    proxies = trace.proxies()
    step_cap = 2.0 * params.max_iters * params.delta_n
    contact_end = max(hold_start, first_contact)
    contact = (first_contact, contact_end) if contact_end > first_contact else None
    if contact:
        for i in range(max(first_contact, 1), contact_end):
            jump = float(np.linalg.norm(proxies[i] - proxies[i - 1]))
            if jump > step_cap:
                failures.append(
                    f"contact phase: proxy jumped {jump:.3f} mm at tick {i} "
                    f"(cap {step_cap:.3f})"
                )
                break

    hold = None
    settle = None
    if hold_start < n:
        hold = (hold_start, n)
        window = 10
        settle_limit = min(hold_start + window, n)
        settled_at = None
        for i in range(hold_start, n):
            if i == 0:
                continue
            disp = float(np.linalg.norm(proxies[i] - proxies[i - 1]))
            if disp < params.eps_converge:
                if settled_at is None:
                    settled_at = i
            else:
                if settled_at is not None and i > settle_limit:
                    failures.append(
                        f"hold phase: proxy moved {disp:.2e} mm at tick {i} after settling"
                    )
                    break
                settled_at = None
        if settled_at is None:
            failures.append("hold phase: proxy never went stationary")
        elif settled_at > settle_limit:
            failures.append(
                f"hold phase: proxy settled at tick {settled_at}, "
                f"limit was {settle_limit}"
            )
        else:
            settle = settled_at - hold_start

    return PhaseReport(free, contact, hold, settle, tuple(failures))
