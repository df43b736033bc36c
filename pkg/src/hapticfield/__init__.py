"""Proxy-based haptic rendering of depth-grid (Monge) surfaces.

The package renders touch feedback over regular height grids: a proxy point
is kept on the bilinear surface while the haptic interface point (HIP)
follows the user, and the spring between them is the rendered force.
Gaussian pyramids provide multiscale zoom; the harness replays scripted
trajectories for validation and latency benchmarking; the service streams
live sessions to the browser explorer.
"""

from .engine import EngineSession, Snapshot, session_from_field
from .errors import (
    DegenerateSegmentError,
    EmptyFieldError,
    GridParseError,
    GridSizeError,
    HapticFieldError,
    OutsideExtentError,
    RoiSelectionError,
    TrajectoryError,
)
from .harness import LatencyStats, PhaseReport, benchmark_latency, check_phases, run_trajectory
from .io import (
    ForceTrace,
    PointCloudSample,
    TraceSample,
    Trajectory,
    fill_holes,
    load_depth_grid,
    load_trajectory,
    mhdf_bytes,
    rasterize_point_cloud,
    read_force_trace,
    save_depth_grid,
    save_depth_grid_csv,
    save_trajectory,
    write_force_trace,
)
from .pyramid import DepthPyramid, build_pyramid, gaussian_kernel, reduce_level
from .renderer import (
    HapticState,
    RenderParams,
    compute_force,
    initial_state,
    resolve_proxy,
    step_proxy,
    tick,
)
from .surface import (
    DepthField,
    SurfacePoint,
    is_penetrating,
    ray_surface_intersect,
    sample_depth,
    surface_normal,
    surface_point,
)
from .workspace import (
    DEFAULT_ROI_NODES,
    WORKSPACE_EXTENT_MM,
    RoiSelection,
    WorkspaceMapping,
    full_selection,
    model_to_workspace,
    select_roi,
    to_workspace_field,
    workspace_to_model,
)

__version__ = "0.1.0"
