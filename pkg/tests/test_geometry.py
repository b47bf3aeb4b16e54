import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from jcsc_sim.geometry import NodeWorld, place_around_reference, place_nodes, sector_count_for, sector_of
from jcsc_sim.rng import RngHandle


@pytest.mark.parametrize("dst,expected", [((1, 0), 0), ((0, 1), 9), ((-1, 0), 18), ((0, -1), 27), ((1, -1e-9), 35)])
def test_sector_examples(dst, expected):
    assert sector_of((0, 0), dst, 36) == expected


def test_sector_edge_goes_up():
    # bearing exactly 90 deg sits on the edge between sectors 8 and 9
    assert sector_of((0, 0), (0, 5), 36) == 9


def test_coincident_points_raise():
    with pytest.raises(ValueError, match="coincident"):
        sector_of((1, 1), (1, 1), 36)


def test_sector_count_for_beamwidth():
    assert sector_count_for(10.0) == 36


coords = st.integers(-1000, 1000)


@settings(max_examples=200, deadline=None)
@given(ax=coords, ay=coords, bx=coords, by=coords)
def test_sector_reciprocity(ax, ay, bx, by):
    assume((ax, ay) != (bx, by))
    s_ab = sector_of((ax, ay), (bx, by), 36)
    s_ba = sector_of((bx, by), (ax, ay), 36)
    assert 0 <= s_ab < 36
    assert s_ba == (s_ab + 18) % 36


def test_uniform_placement_mean_abs_difference():
    # E|U1 - U2| = side / 3 for two independent uniforms on [0, side]
    side = 100.0
    w = place_nodes(RngHandle(3), 4000, side)
    x = w.positions[:, 0]
    a, b = x[: len(x) // 2], x[len(x) // 2:]
    assert abs(np.abs(a - b).mean() - side / 3) < 0.02 * side / 3


def test_place_around_reference_inside_disc():
    w = place_around_reference(RngHandle(1), 200, 100.0)
    d = w.distances()[0]
    assert w.n == 201
    assert np.all(d[1:] <= 100.0 + 1e-9)
    assert w.sense_range_m == 50.0


def test_empty_world_rejected():
    with pytest.raises(ValueError, match="empty"):
        NodeWorld(np.zeros((0, 2)), 50.0)
    with pytest.raises(ValueError, match="empty"):
        place_nodes(RngHandle(0), 0, 10.0)


def test_outside_square_rejected():
    with pytest.raises(ValueError, match="outside"):
        NodeWorld(np.array([[0.0, 0.0], [101.0, 5.0]]), 50.0, side_m=100.0)


def test_distances_symmetric():
    w = place_nodes(RngHandle(9), 10, 50.0)
    d = w.distances()
    assert np.allclose(d, d.T)
    assert np.all(np.diag(d) == 0)
    assert math.isclose(d[0, 1], float(np.hypot(*(w.positions[0] - w.positions[1]))))
