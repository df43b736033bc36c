"""Ingestion and persistence: depth grids, point clouds, trajectories, traces.

All I/O happens at load/save boundaries, never on the tick path.

File formats
------------
- Binary depth grid (.mhdf): 64-byte header (magic ``MHDF``, version, flags,
  width, height, spacing, z_max) followed by row-major 32-bit little-endian
  floats, then a packed hole bitmap (LSB-first, row-major).
- CSV depth grid: ``# spacing=<mm>`` header line (optionally ``# z_max=<mm>``),
  then one row of comma-separated heights per grid row.  Empty cells and
  ``nan`` become holes.
- Trajectory CSV: ``t_ms,x_mm,y_mm,z_mm`` with strictly increasing integer
  t_ms (workspace coordinates).
- Force trace CSV: ``t_ms,hip_x,...,fx,fy,fz,in_contact,tick_us``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import EmptyFieldError, GridParseError, TrajectoryError
from .surface import DepthField, Vec3

_MHDF_MAGIC = b"MHDF"
_MHDF_VERSION = 1
_MHDF_HEADER = struct.Struct("<4sHHIIdd")  # magic, version, flags, w, h, spacing, z_max
_FLAG_HAS_HOLES = 1
_FLAG_HAS_ZMAX = 2


# ---------------------------------------------------------------------------
# depth grids


def mhdf_bytes(field: DepthField) -> bytes:
    """Serialize a grid to the binary .mhdf layout.

    Heights are stored as float32: loading back a freshly saved field is
    bit-identical whenever the heights are float32-representable (always
    true after one save/load cycle).
    """
    flags = 0
    if field.has_holes():
        flags |= _FLAG_HAS_HOLES
    z_max = field.z_max
    if z_max is not None:
        flags |= _FLAG_HAS_ZMAX
    header = _MHDF_HEADER.pack(
        _MHDF_MAGIC, _MHDF_VERSION, flags, field.width, field.height,
        field.spacing, 0.0 if z_max is None else z_max,
    )
    header = header.ljust(64, b"\x00")
    body = field.values.astype("<f4").tobytes()
    bits = np.packbits(field.hole_mask.ravel(), bitorder="little").tobytes()
    return header + body + bits


def save_depth_grid(field: DepthField, path) -> None:
    """Write the binary .mhdf form of a grid."""
    Path(path).write_bytes(mhdf_bytes(field))


def _load_mhdf(path: Path) -> DepthField:
    raw = path.read_bytes()
    if len(raw) < 64:
        raise GridParseError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, flags, w, h, spacing, z_max = _MHDF_HEADER.unpack_from(raw, 0)
    if magic != _MHDF_MAGIC:
        raise GridParseError(f"{path}: bad magic {magic!r} at offset 0")
    if version != _MHDF_VERSION:
        raise GridParseError(f"{path}: unsupported version {version}")
    if not math.isfinite(spacing) or spacing <= 0:
        raise GridParseError(f"{path}: non-finite or non-positive spacing {spacing}")
    n = w * h
    need = 64 + 4 * n
    if len(raw) < need:
        raise GridParseError(f"{path}: value block ends at {len(raw)}, expected {need}")
    values = np.frombuffer(raw, dtype="<f4", count=n, offset=64).astype(np.float64)
    values = values.reshape(h, w)
    bit_off = need
    n_bytes = (n + 7) // 8
    if len(raw) < bit_off + n_bytes:
        raise GridParseError(f"{path}: hole bitmap ends at {len(raw)}, expected {bit_off + n_bytes}")
    bits = np.frombuffer(raw, dtype=np.uint8, count=n_bytes, offset=bit_off)
    mask = np.unpackbits(bits, count=n, bitorder="little").astype(bool).reshape(h, w)
    return DepthField(
        width=w, height=h, spacing=spacing, values=values, hole_mask=mask,
        z_max=z_max if flags & _FLAG_HAS_ZMAX else None,
    )


def _load_csv_grid(path: Path) -> DepthField:
    spacing = None
    z_max = None
    rows: list[list[float]] = []
    holes: list[list[bool]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    key = key.strip().lower()
                    try:
                        if key == "spacing":
                            spacing = float(val)
                        elif key == "z_max":
                            z_max = float(val)
                    except ValueError:
                        raise GridParseError(f"{path}:{lineno}: bad header value {val!r}") from None
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise GridParseError(
                    f"{path}:{lineno}: row has {len(cells)} cells, expected {width}"
                )
            vals = []
            hs = []
            for col, cell in enumerate(cells):
                cell = cell.strip()
                if cell == "" or cell.lower() == "nan":
                    vals.append(0.0)  # placeholder until fill_holes
                    hs.append(True)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise GridParseError(
                        f"{path}:{lineno}: column {col + 1}: not a number: {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    vals.append(0.0)
                    hs.append(True)
                else:
                    vals.append(v)
                    hs.append(False)
            rows.append(vals)
            holes.append(hs)
    if spacing is None:
        raise GridParseError(f"{path}: missing '# spacing=<mm>' header line")
    if not rows:
        raise GridParseError(f"{path}: no data rows")
    return DepthField(
        width=width,
        height=len(rows),
        spacing=spacing,
        values=np.asarray(rows, dtype=np.float64),
        hole_mask=np.asarray(holes, dtype=bool),
        z_max=z_max,
    )


def load_depth_grid(path, format: Optional[str] = None) -> DepthField:
    """Load a grid; format inferred from the suffix unless given.

    Missing or NaN entries come back hole-masked with a placeholder height
    of 0; call fill_holes before rendering.
    """
    path = Path(path)
    if format is None:
        format = "mhdf" if path.suffix.lower() == ".mhdf" else "csv"
    if format == "mhdf":
        return _load_mhdf(path)
    if format == "csv":
        return _load_csv_grid(path)
    raise ValueError(f"unknown grid format {format!r}")


def save_depth_grid_csv(field: DepthField, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# spacing={field.spacing!r}\n")
        if field.z_max is not None:
            fh.write(f"# z_max={field.z_max!r}\n")
        mask = field.hole_mask
        for j in range(field.height):
            cells = [
                "" if mask[j, i] else repr(float(field.values[j, i]))
                for i in range(field.width)
            ]
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# point clouds


@dataclass(frozen=True)
class PointCloudSample:
    """One raw scan sample in mm."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError("point coordinates must be finite")


def rasterize_point_cloud(points, width: int, height: int, spacing: float) -> DepthField:
    """Bin a point cloud onto the lattice: each cell keeps its highest z.

    Points bin to their nearest grid node; the max rule keeps the outer
    (visible) surface when several samples stack up.  Cells that receive no
    points come back hole-masked.  Accepts an (N, 3) array-like or a
    sequence of PointCloudSample.
    """
    if width < 2 or height < 2 or spacing <= 0:
        raise ValueError("grid must be at least 2x2 with positive spacing")
    if isinstance(points, (list, tuple)) and points and isinstance(points[0], PointCloudSample):
        points = [(p.x, p.y, p.z) for p in points]
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty (N, 3) array")
    if not np.isfinite(pts).all():
        raise ValueError("point coordinates must be finite")
    i = np.rint(pts[:, 0] / spacing).astype(np.int64)
    j = np.rint(pts[:, 1] / spacing).astype(np.int64)
    keep = (i >= 0) & (i < width) & (j >= 0) & (j < height)
    if not keep.any():
        raise EmptyFieldError("all points fall outside the grid extent")
    i, j, z = i[keep], j[keep], pts[keep, 2]
    values = np.full((height, width), -np.inf)
    np.maximum.at(values, (j, i), z)
    mask = ~np.isfinite(values)
    values[mask] = 0.0
    return DepthField(
        width=width, height=height, spacing=float(spacing), values=values, hole_mask=mask
    )


def fill_holes(field: DepthField) -> DepthField:
    """Replace every hole with the base-plane height z_max.

    z_max defaults to the maximum over non-hole values, so the proxy rides
    over gaps at the top of the object instead of sinking through them.
    Idempotent; non-hole values are untouched.
    """
    mask = field.hole_mask
    if field.z_max is not None:
        z_max = float(field.z_max)
    else:
        real = field.values[~mask]
        if real.size == 0:
            raise EmptyFieldError("field is all holes and has no explicit z_max")
        z_max = float(real.max())
    if not mask.any():
        if field.z_max is not None:
            return field
        return DepthField(
            width=field.width, height=field.height, spacing=field.spacing,
            values=field.values, hole_mask=mask, z_max=z_max,
        )
    values = field.values.copy()
    values[mask] = z_max
    return DepthField(
        width=field.width, height=field.height, spacing=field.spacing,
        values=values, hole_mask=mask.copy(), z_max=z_max,
    )


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Trajectory:
    """HIP positions at consecutive (or at least increasing) milliseconds."""

    t_ms: np.ndarray     # (N,) int64
    positions: np.ndarray  # (N, 3) float64, workspace mm

    def __post_init__(self):
        t = np.ascontiguousarray(self.t_ms, dtype=np.int64)
        p = np.ascontiguousarray(self.positions, dtype=np.float64)
        if t.ndim != 1 or p.shape != (t.size, 3):
            raise TrajectoryError("trajectory arrays must be (N,) and (N, 3)")
        if t.size and (np.diff(t) <= 0).any():
            raise TrajectoryError("t_ms must be strictly increasing")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "positions", p)

    def __len__(self) -> int:
        return int(self.t_ms.size)

    @classmethod
    def from_positions(cls, positions, t0: int = 0) -> "Trajectory":
        p = np.asarray(positions, dtype=np.float64)
        return cls(t_ms=np.arange(t0, t0 + p.shape[0], dtype=np.int64), positions=p)

    def is_consecutive(self) -> bool:
        return len(self) == 0 or bool((np.diff(self.t_ms) == 1).all())


def load_trajectory(path) -> Trajectory:
    path = Path(path)
    ts: list[int] = []
    ps: list[tuple[float, float, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "t_ms,x_mm,y_mm,z_mm":
            raise GridParseError(f"{path}:1: bad trajectory header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 4:
                raise GridParseError(f"{path}:{lineno}: expected 4 columns, got {len(cells)}")
            try:
                ts.append(int(cells[0]))
                ps.append((float(cells[1]), float(cells[2]), float(cells[3])))
            except ValueError:
                raise GridParseError(f"{path}:{lineno}: bad number in {line!r}") from None
    return Trajectory(
        t_ms=np.asarray(ts, dtype=np.int64),
        positions=np.asarray(ps, dtype=np.float64).reshape(len(ps), 3),
    )


def save_trajectory(traj: Trajectory, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write("t_ms,x_mm,y_mm,z_mm\n")
        for t, p in zip(traj.t_ms.tolist(), traj.positions.tolist()):
            fh.write(f"{t},{p[0]!r},{p[1]!r},{p[2]!r}\n")


# ---------------------------------------------------------------------------
# force traces


@dataclass(frozen=True)
class TraceSample:
    t_ms: int
    hip: Vec3
    proxy: Vec3
    force: Vec3
    in_contact: bool
    tick_us: float = 0.0


@dataclass(frozen=True)
class ForceTrace:
    """Tick-by-tick record of one interaction, 1 ms apart."""

    samples: tuple[TraceSample, ...]

    def __post_init__(self):
        samples = tuple(self.samples)
        for a, b in zip(samples, samples[1:]):
            if b.t_ms != a.t_ms + 1:
                raise TrajectoryError(
                    f"trace timestamps must advance by 1 ms, got {a.t_ms} -> {b.t_ms}"
                )
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def forces(self) -> np.ndarray:
        return np.asarray([s.force for s in self.samples], dtype=np.float64)

    def proxies(self) -> np.ndarray:
        return np.asarray([s.proxy for s in self.samples], dtype=np.float64)

    def hips(self) -> np.ndarray:
        return np.asarray([s.hip for s in self.samples], dtype=np.float64)


_TRACE_HEADER = "t_ms,hip_x,hip_y,hip_z,proxy_x,proxy_y,proxy_z,fx,fy,fz,in_contact,tick_us"


def write_force_trace(trace: ForceTrace, path) -> None:
    """Lossless CSV: floats via repr, so read-back reproduces every bit."""
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write(_TRACE_HEADER + "\n")
        for s in trace.samples:
            fh.write(
                f"{s.t_ms},{s.hip[0]!r},{s.hip[1]!r},{s.hip[2]!r},"
                f"{s.proxy[0]!r},{s.proxy[1]!r},{s.proxy[2]!r},"
                f"{s.force[0]!r},{s.force[1]!r},{s.force[2]!r},"
                f"{1 if s.in_contact else 0},{s.tick_us!r}\n"
            )


def read_force_trace(path) -> ForceTrace:
    path = Path(path)
    samples: list[TraceSample] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _TRACE_HEADER:
            raise GridParseError(f"{path}:1: bad trace header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            c = line.split(",")
            if len(c) != 12:
                raise GridParseError(f"{path}:{lineno}: expected 12 columns, got {len(c)}")
            try:
                samples.append(
                    TraceSample(
                        t_ms=int(c[0]),
                        hip=(float(c[1]), float(c[2]), float(c[3])),
                        proxy=(float(c[4]), float(c[5]), float(c[6])),
                        force=(float(c[7]), float(c[8]), float(c[9])),
                        in_contact=c[10] == "1",
                        tick_us=float(c[11]),
                    )
                )
            except ValueError:
                raise GridParseError(f"{path}:{lineno}: bad number in {line!r}") from None
    return ForceTrace(samples=tuple(samples))
