import math

import numpy as np
import pytest
from hypothesis import strategies as st

from hapticfield.surface import DepthField


def grid_from_function(fn, width, height, spacing=1.0):
    """Sample z = fn(x, y) on the lattice; the workhorse for test fields."""
    vals = np.empty((height, width), dtype=np.float64)
    for j in range(height):
        for i in range(width):
            vals[j, i] = fn(i * spacing, j * spacing)
    return DepthField.from_array(vals, spacing)


def flat(value=10.0, width=8, height=8, spacing=1.0):
    return grid_from_function(lambda x, y: value, width, height, spacing)


def ramp(slope=1.0, width=8, height=8, spacing=1.0):
    return grid_from_function(lambda x, y: slope * x, width, height, spacing)


@st.composite
def small_fields(draw, min_side=2, max_side=9):
    w = draw(st.integers(min_side, max_side))
    h = draw(st.integers(min_side, max_side))
    spacing = draw(st.sampled_from([0.25, 0.5, 1.0, 2.0]))
    vals = draw(
        st.lists(
            st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, width=32),
            min_size=w * h,
            max_size=w * h,
        )
    )
    arr = np.array(vals, dtype=np.float64).reshape(h, w)
    return DepthField.from_array(arr, spacing)


@st.composite
def lateral_points(draw, field):
    x = draw(st.floats(min_value=0.0, max_value=field.extent_x, allow_nan=False))
    y = draw(st.floats(min_value=0.0, max_value=field.extent_y, allow_nan=False))
    return (x, y)


def assert_vec_close(a, b, tol=1e-9):
    assert max(abs(a[i] - b[i]) for i in range(3)) <= tol, f"{a} vs {b}"


def angle_between(a, b):
    na = math.sqrt(sum(c * c for c in a))
    nb = math.sqrt(sum(c * c for c in b))
    dot = sum(a[i] * b[i] for i in range(3)) / (na * nb)
    return math.acos(max(-1.0, min(1.0, dot)))


@pytest.fixture
def flat10():
    return flat(10.0)
