import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hapticfield.errors import DegenerateSegmentError, OutsideExtentError
from hapticfield.surface import (
    DepthField,
    SurfacePoint,
    is_penetrating,
    ray_surface_intersect,
    sample_depth,
    surface_normal,
    surface_point,
)

from conftest import angle_between, flat, grid_from_function, ramp, small_fields


# ---------------------------------------------------------------------------
# construction


def test_field_validation():
    with pytest.raises(ValueError):
        DepthField.from_array(np.zeros((1, 5)), 1.0)
    with pytest.raises(ValueError):
        DepthField.from_array(np.zeros((5, 5)), 0.0)
    with pytest.raises(ValueError):
        DepthField.from_array(np.full((3, 3), np.nan), 1.0)


def test_field_is_immutable():
    f = flat(5.0)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


# ---------------------------------------------------------------------------
# sample_depth


def test_bilinear_center_of_corners():
    vals = np.array([[0.0, 1.0], [1.0, 2.0]])
    f = DepthField.from_array(vals, 1.0)
    assert sample_depth(f, 0.5, 0.5) == pytest.approx(1.0, abs=1e-12)


def test_sample_reproduces_nodes_bitwise():
    rng = np.random.default_rng(7)
    vals = rng.uniform(-20, 20, size=(6, 5))
    f = DepthField.from_array(vals, 1.0)
    for j in range(6):
        for i in range(5):
            assert sample_depth(f, float(i), float(j)) == vals[j, i]


def test_linear_function_interpolated_exactly():
    # bilinear interpolation of a linear field is exact; oracle is direct
    # evaluation of the generating function
    f = ramp(slope=1.0, width=8, height=8)
    assert sample_depth(f, 3.25, 4.7) == pytest.approx(3.25, abs=1e-12)


def test_out_of_extent_raises():
    f = flat(1.0, width=4, height=4, spacing=2.0)
    with pytest.raises(OutsideExtentError):
        sample_depth(f, -0.01, 0.0)
    with pytest.raises(OutsideExtentError):
        sample_depth(f, 0.0, 6.01)
    # the far boundary itself is valid
    assert sample_depth(f, 6.0, 6.0) == 1.0


@settings(max_examples=60, deadline=None)
@given(small_fields(), st.data())
def test_sample_within_cell_bounds(field, data):
    x = data.draw(st.floats(0.0, field.extent_x))
    y = data.draw(st.floats(0.0, field.extent_y))
    s = field.spacing
    i = min(int(x / s), field.width - 2)
    j = min(int(y / s), field.height - 2)
    corners = [field.values[j, i], field.values[j, i + 1],
               field.values[j + 1, i], field.values[j + 1, i + 1]]
    z = sample_depth(field, x, y)
    assert min(corners) - 1e-9 <= z <= max(corners) + 1e-9


@settings(max_examples=40, deadline=None)
@given(small_fields(min_side=3), st.data())
def test_sample_is_lipschitz(field, data):
    eps = 1e-4
    x = data.draw(st.floats(0.0, field.extent_x - eps))
    y = data.draw(st.floats(0.0, field.extent_y))
    diffs = np.abs(np.diff(field.values, axis=1)).max()
    lip = diffs / field.spacing + 1e-9
    dz = abs(sample_depth(field, x + eps, y) - sample_depth(field, x, y))
    assert dz <= lip * eps + 1e-12


# ---------------------------------------------------------------------------
# surface_normal


def test_normal_flat_plane():
    f = flat(10.0)
    assert surface_normal(f, 3.3, 2.2) == pytest.approx((0.0, 0.0, 1.0))


def test_normal_ramp_by_geometry():
    f = ramp(slope=1.0)
    n = surface_normal(f, 2.5, 2.5)
    r = 1.0 / math.sqrt(2.0)
    assert n == pytest.approx((-r, 0.0, r), abs=1e-12)


def test_normal_paraboloid_within_one_degree():
    # compare against the analytic gradient of the generating function
    gen = lambda x, y: 0.1 * (x * x + y * y)
    f = grid_from_function(gen, 81, 81, spacing=0.1)
    n = surface_normal(f, 2.0, 0.0)
    expected = np.array([-0.4, 0.0, 1.0])
    expected /= np.linalg.norm(expected)
    assert angle_between(n, tuple(expected)) < math.radians(1.0)


@settings(max_examples=60, deadline=None)
@given(small_fields(), st.data())
def test_normal_unit_and_upward(field, data):
    x = data.draw(st.floats(0.0, field.extent_x))
    y = data.draw(st.floats(0.0, field.extent_y))
    n = surface_normal(field, x, y)
    assert abs(math.sqrt(sum(c * c for c in n)) - 1.0) <= 1e-9
    assert n[2] > 0.0


def test_surface_point_combines_height_and_normal():
    f = ramp(slope=1.0)
    sp = surface_point(f, 2.5, 3.0)
    assert sp.position == (2.5, 3.0, sample_depth(f, 2.5, 3.0))
    assert sp.normal == surface_normal(f, 2.5, 3.0)


def test_surface_point_validates_normal():
    with pytest.raises(ValueError):
        SurfacePoint(position=(0.0, 0.0, 0.0), normal=(0.0, 0.0, 2.0))
    with pytest.raises(ValueError):
        SurfacePoint(position=(0.0, 0.0, 0.0), normal=(0.0, 0.0, -1.0))


def test_normal_constant_on_affine_fields():
    f = grid_from_function(lambda x, y: 2.0 + 0.5 * x - 0.25 * y, 9, 9, 0.5)
    ref = surface_normal(f, 0.1, 0.1)
    for x, y in [(0.7, 3.3), (2.0, 2.0), (3.9, 0.2)]:
        assert surface_normal(f, x, y) == pytest.approx(ref, abs=1e-12)


# ---------------------------------------------------------------------------
# is_penetrating


def test_penetration_strictness(flat10):
    assert not is_penetrating(flat10, (1.0, 1.0, 10.0))
    assert is_penetrating(flat10, (1.0, 1.0, 9.999))


def test_penetration_on_ramp():
    f = ramp(slope=1.0)
    assert is_penetrating(f, (4.0, 2.0, 3.9))


# ---------------------------------------------------------------------------
# ray_surface_intersect


def _scan_first_crossing(field, origin, target, n=100_000):
    """Dense-scan oracle: first parameter where z - f goes negative."""
    o = np.asarray(origin, dtype=float)
    d = np.asarray(target, dtype=float) - o
    prev_t = 0.0
    for k in range(1, n + 1):
        t = k / n
        p = o + d * t
        if not (0.0 <= p[0] <= field.extent_x and 0.0 <= p[1] <= field.extent_y):
            return None
        if p[2] < sample_depth(field, p[0], p[1]):
            return prev_t, t
        prev_t = t
    return None


def test_ray_vertical_onto_plane():
    f = flat(5.0)
    hit = ray_surface_intersect(f, (0.0, 0.0, 8.0), (0.0, 0.0, 2.0), step=0.1)
    assert hit == pytest.approx((0.0, 0.0, 5.0), abs=1e-9)


def test_ray_misses_above_plane():
    f = flat(5.0)
    assert ray_surface_intersect(f, (0.0, 0.0, 8.0), (3.0, 0.0, 6.0), step=0.1) is None


def test_ray_on_sine_texture_matches_dense_scan():
    f = grid_from_function(lambda x, y: 5.0 + 0.5 * math.sin(2.0 * math.pi * x / 4.0),
                           65, 9, spacing=0.125)
    origin = (0.5, 0.0, 7.0)
    target = (6.0, 0.0, 4.0)
    step = 0.1
    hit = ray_surface_intersect(f, origin, target, step=step)
    assert hit is not None
    bracket = _scan_first_crossing(f, origin, target)
    assert bracket is not None
    o = np.asarray(origin)
    d = np.asarray(target) - o
    seg_len = np.linalg.norm(d)
    t_hit = np.dot(np.asarray(hit) - o, d) / (seg_len * seg_len)
    lo, hi = bracket
    assert (lo - 2.0 * step / seg_len) <= t_hit <= (hi + 2.0 * step / seg_len)


def test_ray_crossing_point_is_on_surface():
    f = grid_from_function(lambda x, y: 3.0 + 0.3 * math.sin(x) * math.cos(y), 33, 33, 0.25)
    hit = ray_surface_intersect(f, (0.2, 0.3, 6.0), (7.0, 7.5, 1.0), step=0.1)
    assert hit is not None
    g = hit[2] - sample_depth(f, hit[0], hit[1])
    assert 0.0 <= g <= 1e-9


def test_ray_truncated_at_extent():
    f = flat(5.0, width=4, height=4, spacing=1.0)
    # leaves the grid laterally before it could ever cross
    assert ray_surface_intersect(f, (2.5, 1.5, 6.0), (20.0, 1.5, 4.0), step=0.1) is None


def test_ray_zero_length_rejected(flat10):
    with pytest.raises(DegenerateSegmentError):
        ray_surface_intersect(flat10, (1.0, 1.0, 12.0), (1.0, 1.0, 12.0))


def test_ray_penetrating_origin_rejected(flat10):
    with pytest.raises(ValueError):
        ray_surface_intersect(flat10, (1.0, 1.0, 9.0), (1.0, 1.0, 12.0))


@settings(max_examples=40, deadline=None)
@given(small_fields(min_side=3), st.data())
def test_ray_first_crossing_matches_scan(field, data):
    z_top = float(field.values.max()) + 1.0
    x0 = data.draw(st.floats(0.0, field.extent_x))
    y0 = data.draw(st.floats(0.0, field.extent_y))
    x1 = data.draw(st.floats(0.0, field.extent_x))
    y1 = data.draw(st.floats(0.0, field.extent_y))
    z1 = data.draw(st.floats(float(field.values.min()) - 2.0, z_top))
    origin = (x0, y0, z_top)
    target = (x1, y1, z1)
    step = 0.25
    hit = ray_surface_intersect(field, origin, target, step=step)
    scan = _scan_first_crossing(field, origin, target, n=20_000)
    seg_len = math.dist(origin, target)
    if seg_len == 0:
        return
    if scan is None:
        # the marching step may catch crossings the coarse scan brackets miss,
        # but a scan hit always implies a march hit
        return
    assert hit is not None
    t_hit = sum((hit[i] - origin[i]) * (target[i] - origin[i]) for i in range(3)) / (seg_len**2)
    lo, hi = scan
    assert t_hit <= hi + 2.0 * step / seg_len
