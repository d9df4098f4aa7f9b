"""Polyline sampling and workspace geometry for physical pre-checks.

The arm is modeled as a point following piecewise-linear paths. Checks
sample paths at a fixed resolution (default 1 cm) and test the samples
against axis-aligned forbidden zones and spherical fragile objects.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .model import FragileObject, Vec3, Zone

DEFAULT_RESOLUTION = 0.01  # meters between consecutive path samples


def segment_samples(a: Vec3, b: Vec3, resolution: float = DEFAULT_RESOLUTION) -> np.ndarray:
    """Evenly spaced samples of segment a->b, endpoints included, spacing
    at most `resolution`. Count is max(2, ceil(len/resolution) + 1)."""
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(pb - pa))
    if length == 0.0:
        return pa[np.newaxis, :]
    count = max(2, int(np.ceil(length / resolution)) + 1)
    t = np.linspace(0.0, 1.0, count)
    return pa[np.newaxis, :] + t[:, np.newaxis] * (pb - pa)[np.newaxis, :]


def polyline_samples(points: Sequence[Vec3], resolution: float = DEFAULT_RESOLUTION) -> np.ndarray:
    """Samples of the polyline through `points` at the given resolution."""
    if not points:
        return np.zeros((0, 3))
    if len(points) == 1:
        return np.asarray(points, dtype=float)
    parts = [segment_samples(points[i], points[i + 1], resolution) for i in range(len(points) - 1)]
    # Drop duplicated segment endpoints except the very first.
    trimmed = [parts[0]] + [p[1:] for p in parts[1:]]
    return np.vstack(trimmed)


def points_in_zone(samples: np.ndarray, zone: Zone) -> np.ndarray:
    lo = np.asarray(zone.min_corner, dtype=float)
    hi = np.asarray(zone.max_corner, dtype=float)
    return np.all((samples >= lo) & (samples <= hi), axis=1)


def any_point_in_zones(samples: np.ndarray, zones: Iterable[Zone]) -> bool:
    if samples.size == 0:
        return False
    return any(bool(points_in_zone(samples, z).any()) for z in zones)


def distance_to_zone(p: Vec3, zone: Zone) -> float:
    """Euclidean distance from a point to an axis-aligned box; 0 inside."""
    gaps = [
        max(zone.min_corner[i] - p[i], 0.0, p[i] - zone.max_corner[i])
        for i in range(3)
    ]
    return float(np.linalg.norm(gaps))


def min_distance_to_zones(samples: np.ndarray, zones: Sequence[Zone]) -> float:
    """Smallest distance from any sample to any zone; inf when no zones."""
    if not zones or samples.size == 0:
        return float("inf")
    best = float("inf")
    for z in zones:
        lo = np.asarray(z.min_corner, dtype=float)
        hi = np.asarray(z.max_corner, dtype=float)
        gaps = np.maximum(np.maximum(lo - samples, 0.0), samples - hi)
        d = np.sqrt((gaps ** 2).sum(axis=1)).min()
        best = min(best, float(d))
    return best


def wall_slack(p: Vec3, box: Zone) -> float:
    """Distance from an interior point to the nearest face of the box
    (negative when outside)."""
    slacks = [
        min(p[i] - box.min_corner[i], box.max_corner[i] - p[i])
        for i in range(3)
    ]
    return float(min(slacks))


def fragile_clearance(samples: np.ndarray, objects: Sequence[FragileObject]) -> float:
    """Smallest clearance between any path sample and any fragile object's
    surface (center distance minus radius); inf when there are none."""
    if not objects or samples.size == 0:
        return float("inf")
    best = float("inf")
    for obj in objects:
        center = np.asarray(obj.position, dtype=float)
        d = np.sqrt(((samples - center) ** 2).sum(axis=1)).min()
        best = min(best, float(d) - obj.radius)
    return best


def path_length(points: Sequence[Vec3]) -> float:
    if len(points) < 2:
        return 0.0
    arr = np.asarray(points, dtype=float)
    return float(np.linalg.norm(np.diff(arr, axis=0), axis=1).sum())


__all__ = [
    "DEFAULT_RESOLUTION",
    "segment_samples",
    "polyline_samples",
    "points_in_zone",
    "any_point_in_zones",
    "distance_to_zone",
    "min_distance_to_zones",
    "wall_slack",
    "fragile_clearance",
    "path_length",
]
