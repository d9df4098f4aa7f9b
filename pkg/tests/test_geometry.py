import math

import numpy as np
import pytest

from ztpm import geometry
from ztpm.model import FragileObject, Zone


def test_segment_samples_endpoints_and_spacing():
    a, b = (0.0, 0.0, 0.0), (0.1, 0.0, 0.0)
    samples = geometry.segment_samples(a, b, resolution=0.01)
    assert tuple(samples[0]) == a
    assert tuple(samples[-1]) == b
    gaps = np.linalg.norm(np.diff(samples, axis=0), axis=1)
    assert gaps.max() <= 0.01 + 1e-12
    assert len(samples) == 11  # ceil(0.1/0.01) + 1 points, 10 intervals


def test_degenerate_segment_is_one_point():
    samples = geometry.segment_samples((0.2, 0.2, 0.2), (0.2, 0.2, 0.2))
    assert samples.shape == (1, 3)


def test_polyline_drops_duplicate_joints():
    points = [(0.0, 0.0, 0.0), (0.05, 0.0, 0.0), (0.05, 0.05, 0.0)]
    samples = geometry.polyline_samples(points, resolution=0.05)
    as_tuples = [tuple(p) for p in samples]
    assert as_tuples.count((0.05, 0.0, 0.0)) == 1


def test_zone_membership_inclusive_of_faces():
    zone = Zone((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    on_face = np.array([[0.0, 0.5, 0.5]])
    assert geometry.points_in_zone(on_face, zone).all()
    outside = np.array([[-1e-9, 0.5, 0.5]])
    assert not geometry.points_in_zone(outside, zone).any()


def test_distance_to_zone_zero_inside_and_euclidean_outside():
    zone = Zone((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    assert geometry.distance_to_zone((0.5, 0.5, 0.5), zone) == 0.0
    assert geometry.distance_to_zone((2.0, 0.5, 0.5), zone) == pytest.approx(1.0)
    corner = geometry.distance_to_zone((2.0, 2.0, 0.5), zone)
    assert corner == pytest.approx(math.sqrt(2.0))


def test_min_distance_to_zones_over_samples():
    zone = Zone((1.0, -0.1, -0.1), (2.0, 0.1, 0.1))
    samples = geometry.segment_samples((0.0, 0.0, 0.0), (0.5, 0.0, 0.0), 0.01)
    assert geometry.min_distance_to_zones(samples, [zone]) == pytest.approx(0.5, abs=1e-6)
    assert geometry.min_distance_to_zones(samples, []) == float("inf")


def test_wall_slack_sign():
    box = Zone((-1.0, -1.0, 0.0), (1.0, 1.0, 1.0))
    assert geometry.wall_slack((0.0, 0.0, 0.5), box) == pytest.approx(0.5)
    assert geometry.wall_slack((0.9, 0.0, 0.5), box) == pytest.approx(0.1)
    assert geometry.wall_slack((1.5, 0.0, 0.5), box) < 0


def test_fragile_clearance_is_surface_distance():
    obj = FragileObject(position=(0.0, 0.0, 0.0), radius=0.1)
    samples = np.array([[0.5, 0.0, 0.0]])
    assert geometry.fragile_clearance(samples, [obj]) == pytest.approx(0.4)
    assert geometry.fragile_clearance(samples, []) == float("inf")


def test_path_length():
    points = [(0.0, 0.0, 0.0), (0.3, 0.0, 0.0), (0.3, 0.4, 0.0)]
    assert geometry.path_length(points) == pytest.approx(0.7)
    assert geometry.path_length(points[:1]) == 0.0
