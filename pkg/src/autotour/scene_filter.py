"""Visibility filtering: camera field of view, angular occlusion between
buildings, and left-to-right scene ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geo_core import (
    AngularInterval,
    GeoPoint,
    normalize_bearing,
    normalize_relative,
    point_segment_distance,
)
from .osm_ingest import FeatureCategory, GeoFeature

DEFAULT_FOV_DEG = 70.0
DEFAULT_FOV_MARGIN_DEG = 15.0

OCCLUSION_COVERAGE_THRESHOLD = 0.90
OCCLUSION_DEPTH_SEPARATION_M = 2.0
OCCLUSION_GRID_DEG = 0.1

NEARBY_DISTANCE_M = 25.0


@dataclass(frozen=True)
class CameraPose:
    """Photo capture pose: GPS position, compass heading, and horizontal
    field of view with an IMU-error margin.
    """

    position: GeoPoint
    heading: float
    fov_deg: float = DEFAULT_FOV_DEG
    fov_margin_deg: float = DEFAULT_FOV_MARGIN_DEG

    def __post_init__(self) -> None:
        if not 0.0 <= self.heading < 360.0:
            raise ValueError(f"heading must be in [0, 360), got {self.heading}")
        if not 20.0 <= self.fov_deg <= 120.0:
            raise ValueError(f"fov_deg must be in [20, 120], got {self.fov_deg}")
        if self.fov_margin_deg < 0.0:
            raise ValueError("fov_margin_deg must be non-negative")

    def view_interval(self) -> AngularInterval:
        half = self.fov_deg / 2.0 + self.fov_margin_deg
        return AngularInterval(self.heading - half, self.heading + half)


def fov_filter(features: list[GeoFeature], camera: CameraPose) -> list[GeoFeature]:
    """Keep features whose angular interval intersects the widened view cone."""
    view = camera.view_interval()
    return [f for f in features if f.angular_interval.intersects(view)]


def _coverage_mask(interval: AngularInterval) -> np.ndarray:
    """Boolean mask over the 0.1-degree bearing grid covered by an interval."""
    n = int(round(360.0 / OCCLUSION_GRID_DEG))
    bearings = np.arange(n) * OCCLUSION_GRID_DEG
    if interval.is_full:
        return np.ones(n, dtype=bool)
    offset = (bearings - interval.start) % 360.0
    return offset <= interval.span


def occlusion_filter(features: list[GeoFeature], camera: CameraPose) -> list[GeoFeature]:
    """Drop a feature when at least 90% of its angular interval is covered
    by strictly closer buildings.  Only buildings occlude, and ground-plane
    categories are never occluded.
    """
    occluders = [f for f in features if f.category is FeatureCategory.BUILDING]
    kept = []
    for f in features:
        if f.category is not FeatureCategory.BUILDING:
            kept.append(f)
            continue
        closer = [
            o for o in occluders
            if o is not f and o.distance_m < f.distance_m - OCCLUSION_DEPTH_SEPARATION_M
        ]
        if not closer:
            kept.append(f)
            continue
        own = _coverage_mask(f.angular_interval)
        blocked = np.zeros_like(own)
        for o in closer:
            blocked |= _coverage_mask(o.angular_interval)
        coverage = (own & blocked).sum() / max(own.sum(), 1)
        if coverage < OCCLUSION_COVERAGE_THRESHOLD:
            kept.append(f)
    return kept


def relative_bearing(feature: GeoFeature, camera: CameraPose) -> float:
    """Signed bearing of the feature's interval midpoint relative to the
    camera heading, in (-180, 180]; negative is left.
    """
    return normalize_relative(feature.angular_interval.midpoint() - camera.heading)


def sort_left_to_right(features: list[GeoFeature], camera: CameraPose) -> list[GeoFeature]:
    """Order features as they appear across the photo, left to right."""
    return sorted(
        features,
        key=lambda f: (relative_bearing(f, camera), f.distance_m, f.id),
    )


def _min_feature_distance(a: GeoFeature, b: GeoFeature) -> float:
    va, vb = a.local_polygon.vertices, b.local_polygon.vertices
    best = math.inf
    for p in va:
        for i in range(len(vb)):
            best = min(best, point_segment_distance(p, vb[i], vb[(i + 1) % len(vb)]))
    for p in vb:
        for i in range(len(va)):
            best = min(best, point_segment_distance(p, va[i], va[(i + 1) % len(va)]))
    return best


def summarize_nearby(features: list[GeoFeature]) -> list[GeoFeature]:
    """Populate each feature's nearby_info with its sorted-order neighbors
    plus any feature within 25 m.  Mutates and returns the input list.
    """
    for i, f in enumerate(features):
        names: list[str] = []
        neighbors = []
        if i > 0:
            neighbors.append(features[i - 1])
        if i < len(features) - 1:
            neighbors.append(features[i + 1])
        for other in features:
            if other is f or other in neighbors:
                continue
            if _min_feature_distance(f, other) <= NEARBY_DISTANCE_M:
                neighbors.append(other)
        for n in neighbors:
            label = n.display_name
            if label not in names:
                names.append(label)
        f.nearby_info = names
    return features


def visible_scene(features: list[GeoFeature], camera: CameraPose) -> list[GeoFeature]:
    """Full filter chain: FOV, occlusion, ordering, and nearby summaries."""
    return summarize_nearby(
        sort_left_to_right(occlusion_filter(fov_filter(features, camera), camera), camera)
    )
