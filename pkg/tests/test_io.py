import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hapticfield.errors import EmptyFieldError, GridParseError, TrajectoryError
from hapticfield.io import (
    ForceTrace,
    PointCloudSample,
    Trajectory,
    TraceSample,
    fill_holes,
    load_depth_grid,
    load_trajectory,
    rasterize_point_cloud,
    read_force_trace,
    save_depth_grid,
    save_depth_grid_csv,
    save_trajectory,
    write_force_trace,
)
from hapticfield.surface import DepthField, sample_depth


# ---------------------------------------------------------------------------
# grid formats


def test_csv_grid_matches_bilinear_example(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("# spacing=1\n0,1\n1,2\n")
    f = load_depth_grid(p)
    assert (f.width, f.height, f.spacing) == (2, 2, 1.0)
    assert sample_depth(f, 0.5, 0.5) == pytest.approx(1.0)


def test_csv_empty_cell_is_hole(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("# spacing=0.5\n1,2,3\n4,,6\n7,8,9\n")
    f = load_depth_grid(p)
    assert f.hole_mask[1, 1]
    assert f.hole_mask.sum() == 1


def test_csv_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("# spacing=1\n1,2\n3,4,5\n")
    with pytest.raises(GridParseError, match="bad.csv:3"):
        load_depth_grid(p)
    p2 = tmp_path / "nospacing.csv"
    p2.write_text("1,2\n3,4\n")
    with pytest.raises(GridParseError, match="spacing"):
        load_depth_grid(p2)
    p3 = tmp_path / "notnum.csv"
    p3.write_text("# spacing=1\n1,2\n3,x\n")
    with pytest.raises(GridParseError, match="column 2"):
        load_depth_grid(p3)


def test_binary_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(11)
    vals = rng.uniform(-20, 20, size=(7, 5)).astype(np.float32).astype(np.float64)
    mask = rng.random((7, 5)) < 0.2
    f = DepthField(width=5, height=7, spacing=0.25, values=vals, hole_mask=mask, z_max=19.5)
    path = tmp_path / "g.mhdf"
    save_depth_grid(f, path)
    g = load_depth_grid(path)
    assert np.array_equal(g.values, f.values)
    assert np.array_equal(g.hole_mask, f.hole_mask)
    assert (g.width, g.height, g.spacing, g.z_max) == (5, 7, 0.25, 19.5)


def test_binary_double_round_trip_identity(tmp_path):
    # arbitrary float64 heights quantize to float32 once; after that the
    # save/load cycle is the identity
    vals = np.array([[0.1, 0.2], [1.0 / 3.0, 2.0]])
    f = DepthField.from_array(vals, 1.0)
    p1, p2 = tmp_path / "a.mhdf", tmp_path / "b.mhdf"
    save_depth_grid(f, p1)
    g1 = load_depth_grid(p1)
    save_depth_grid(g1, p2)
    g2 = load_depth_grid(p2)
    assert np.array_equal(g1.values, g2.values)


def test_mhdf_parse_errors(tmp_path):
    p = tmp_path / "bad.mhdf"
    p.write_bytes(b"XXXX" + b"\x00" * 60)
    with pytest.raises(GridParseError, match="magic"):
        load_depth_grid(p)
    p.write_bytes(b"MH")
    with pytest.raises(GridParseError, match="truncated"):
        load_depth_grid(p)


def test_csv_writer_round_trip(tmp_path):
    f = DepthField.from_array([[1.25, 2.5], [3.75, 5.0]], 0.5)
    p = tmp_path / "g.csv"
    save_depth_grid_csv(f, p)
    g = load_depth_grid(p)
    assert np.array_equal(g.values, f.values)
    assert g.spacing == 0.5


# ---------------------------------------------------------------------------
# point cloud rasterization


def test_rasterize_one_point_per_cell():
    pts = [(i * 1.0, j * 1.0, float(i + j)) for i in range(3) for j in range(3)]
    f = rasterize_point_cloud(pts, 3, 3, 1.0)
    for j in range(3):
        for i in range(3):
            assert f.values[j, i] == i + j
    assert not f.hole_mask.any()


def test_rasterize_max_rule():
    f = rasterize_point_cloud([(1.0, 1.0, 3.0), (1.1, 0.9, 5.0)], 3, 3, 1.0)
    assert f.values[1, 1] == 5.0


def test_rasterize_marks_empty_cells_as_holes():
    f = rasterize_point_cloud([(0.0, 0.0, 2.0)], 3, 3, 1.0)
    assert not f.hole_mask[0, 0]
    assert f.hole_mask.sum() == 8


def test_rasterize_all_outside_errors():
    with pytest.raises(EmptyFieldError):
        rasterize_point_cloud([(50.0, 50.0, 1.0)], 3, 3, 1.0)


def test_rasterize_accepts_sample_objects():
    pts = [PointCloudSample(0.0, 0.0, 2.0), PointCloudSample(1.0, 1.0, 3.0)]
    f = rasterize_point_cloud(pts, 2, 2, 1.0)
    assert f.values[0, 0] == 2.0 and f.values[1, 1] == 3.0


def test_point_sample_must_be_finite():
    with pytest.raises(ValueError):
        PointCloudSample(0.0, float("nan"), 1.0)


def test_rasterize_ramp_cloud_exact():
    # synthetic cloud with a known generator: node-snapped samples of f = x
    rng = np.random.default_rng(5)
    w = h = 16
    i = rng.integers(0, w, size=100_000)
    j = rng.integers(0, h, size=100_000)
    pts = np.stack([i.astype(float), j.astype(float), i.astype(float)], axis=1)
    f = rasterize_point_cloud(pts, w, h, 1.0)
    covered = ~f.hole_mask
    expect = np.tile(np.arange(w, dtype=float), (h, 1))
    assert np.array_equal(f.values[covered], expect[covered])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rasterize_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 4, size=(60, 3))
    f1 = rasterize_point_cloud(pts, 5, 5, 1.0)
    f2 = rasterize_point_cloud(pts[rng.permutation(60)], 5, 5, 1.0)
    assert np.array_equal(f1.values, f2.values)
    assert np.array_equal(f1.hole_mask, f2.hole_mask)


# ---------------------------------------------------------------------------
# hole filling


def test_fill_holes_sets_zmax():
    vals = np.array([[1.0, 12.0], [0.0, 7.0]])
    mask = np.array([[False, False], [True, False]])
    f = DepthField(width=2, height=2, spacing=1.0, values=vals, hole_mask=mask)
    g = fill_holes(f)
    assert g.values[1, 0] == 12.0
    assert g.z_max == 12.0
    assert g.values[0, 0] == 1.0  # untouched


def test_fill_holes_no_holes_unchanged():
    f = DepthField.from_array([[1.0, 2.0], [3.0, 4.0]], 1.0, z_max=4.0)
    assert fill_holes(f) is f


def test_fill_holes_idempotent():
    vals = np.zeros((3, 3))
    mask = np.zeros((3, 3), dtype=bool)
    mask[0, 0] = mask[2, 2] = mask[1, 1] = True
    vals[0, 1] = 12.0
    f = DepthField(width=3, height=3, spacing=1.0, values=vals, hole_mask=mask)
    g1 = fill_holes(f)
    g2 = fill_holes(g1)
    assert np.array_equal(g1.values, g2.values)
    assert g1.z_max == g2.z_max == 12.0
    assert (g1.values[mask] == 12.0).all()


def test_fill_holes_all_holes_needs_zmax():
    mask = np.ones((2, 2), dtype=bool)
    f = DepthField(width=2, height=2, spacing=1.0, values=np.zeros((2, 2)), hole_mask=mask)
    with pytest.raises(EmptyFieldError):
        fill_holes(f)
    g = fill_holes(
        DepthField(width=2, height=2, spacing=1.0, values=np.zeros((2, 2)),
                   hole_mask=mask, z_max=3.0)
    )
    assert (g.values == 3.0).all()


def test_fill_respects_explicit_zmax():
    vals = np.array([[1.0, 5.0], [0.0, 2.0]])
    mask = np.array([[False, False], [True, False]])
    f = DepthField(width=2, height=2, spacing=1.0, values=vals, hole_mask=mask, z_max=9.0)
    g = fill_holes(f)
    assert g.values[1, 0] == 9.0


# ---------------------------------------------------------------------------
# trajectories


def test_trajectory_round_trip(tmp_path):
    traj = Trajectory.from_positions([(0.0, 0.5, 2.0), (0.1, 0.6, 1.9), (0.2, 0.7, 1.8)])
    p = tmp_path / "t.csv"
    save_trajectory(traj, p)
    back = load_trajectory(p)
    assert np.array_equal(back.t_ms, traj.t_ms)
    assert np.array_equal(back.positions, traj.positions)


def test_trajectory_must_increase():
    with pytest.raises(TrajectoryError):
        Trajectory(t_ms=np.array([0, 0, 1]), positions=np.zeros((3, 3)))


def test_trajectory_header_checked(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("time,x,y,z\n0,0,0,0\n")
    with pytest.raises(GridParseError):
        load_trajectory(p)


# ---------------------------------------------------------------------------
# force traces


def _mk_trace(n=3, tick_us=0.0):
    samples = []
    for t in range(n):
        samples.append(
            TraceSample(
                t_ms=t,
                hip=(0.1 * t, 0.2, 5.0 - t),
                proxy=(0.1 * t, 0.2, max(5.0 - t, 3.0)),
                force=(0.0, 0.0, 0.123456789 * t),
                in_contact=t > 1,
                tick_us=tick_us,
            )
        )
    return ForceTrace(samples=tuple(samples))


def test_trace_round_trip_exact(tmp_path):
    trace = _mk_trace(5)
    p = tmp_path / "trace.csv"
    write_force_trace(trace, p)
    back = read_force_trace(p)
    assert back == trace


def test_empty_trace_header_only(tmp_path):
    p = tmp_path / "empty.csv"
    write_force_trace(ForceTrace(samples=()), p)
    assert p.read_text().count("\n") == 1
    assert len(read_force_trace(p)) == 0


def test_trace_preserves_overrun_duration(tmp_path):
    trace = _mk_trace(2, tick_us=1234.5678901234)
    p = tmp_path / "trace.csv"
    write_force_trace(trace, p)
    back = read_force_trace(p)
    assert back.samples[0].tick_us == 1234.5678901234


def test_trace_requires_millisecond_steps():
    s0 = TraceSample(t_ms=0, hip=(0, 0, 0), proxy=(0, 0, 0), force=(0, 0, 0), in_contact=False)
    s2 = TraceSample(t_ms=2, hip=(0, 0, 0), proxy=(0, 0, 0), force=(0, 0, 0), in_contact=False)
    with pytest.raises(TrajectoryError):
        ForceTrace(samples=(s0, s2))
