"""Geometric photo-to-map matching: build the semi-annular search sector
for each photo feature, score category-filtered map candidates by
normalized overlap ratio, and assign greedily one-to-one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .geo_core import AnnularSector, LocalPoint, normalize_bearing, overlap_area, polygon_area
from .osm_ingest import FeatureCategory, GeoFeature
from .photo_features import PhotoFeature
from .scene_filter import CameraPose

DEFAULT_MATCH_THRESHOLD = 0.02

_TIE_EPS = 1e-6


@dataclass(frozen=True)
class MatchResult:
    """Pairing of a photo feature with its best map candidate, or an
    explicit unmatched record carrying the original description.
    """

    photo_feature: PhotoFeature
    matched: Optional[GeoFeature]
    r_norm: float
    a_overlap: float
    runner_up: Optional[tuple[str, float]] = None

    @property
    def is_matched(self) -> bool:
        return self.matched is not None


def sector_from_photo_feature(camera: CameraPose, pf: PhotoFeature) -> list[AnnularSector]:
    """Search sectors for a photo feature.  Spans wider than 180 degrees
    are split in half; overlap areas are summed downstream.
    """
    left, right = pf.angle_span
    d_min, d_max = pf.distance_range
    center = LocalPoint(0.0, 0.0)
    spans: list[tuple[float, float]]
    if right - left > 180.0:
        mid = (left + right) / 2.0
        spans = [(left, mid), (mid, right)]
    else:
        spans = [(left, right)]
    return [
        AnnularSector(
            center=center,
            r_inner=d_min,
            r_outer=d_max,
            bearing_start=normalize_bearing(camera.heading + lo),
            bearing_end=normalize_bearing(camera.heading + hi),
        )
        for lo, hi in spans
    ]


def candidate_filter(features: list[GeoFeature], category: FeatureCategory) -> list[GeoFeature]:
    """Features matching the photo feature's category; an uncategorized
    photo feature keeps all candidates.
    """
    if category is FeatureCategory.OTHER:
        return list(features)
    return [f for f in features if f.category is category]


def overlap_ratio(sectors, feature: GeoFeature) -> tuple[float, float]:
    """(r_norm, a_overlap) of a feature against one sector or a list of
    split sectors.
    """
    if isinstance(sectors, AnnularSector):
        sectors = [sectors]
    a_overlap = sum(overlap_area(s, feature.local_polygon) for s in sectors)
    a_map = polygon_area(feature.local_polygon)
    r_norm = min(1.0, a_overlap / a_map)
    return r_norm, a_overlap


def _rank_key(camera_origin: LocalPoint, feature: GeoFeature, r_norm: float):
    """Sort key for descending preference: higher r_norm wins; near-ties go
    to the candidate with the nearer centroid, then the smaller id.
    """
    centroid_dist = camera_origin.distance_to(feature.local_polygon.centroid())
    return (-round(r_norm / _TIE_EPS), centroid_dist, feature.id)


def match_feature(pf: PhotoFeature, candidates: list[GeoFeature], camera: CameraPose,
                  threshold: float = DEFAULT_MATCH_THRESHOLD) -> MatchResult:
    """Argmax of r_norm over pre-filtered candidates; below-threshold bests
    leave the photo feature unmatched with its description preserved.
    """
    sectors = sector_from_photo_feature(camera, pf)
    origin = LocalPoint(0.0, 0.0)
    scored = []
    for gf in candidates:
        r_norm, a_overlap = overlap_ratio(sectors, gf)
        scored.append((gf, r_norm, a_overlap))
    scored.sort(key=lambda t: _rank_key(origin, t[0], t[1]))
    if not scored or scored[0][1] < threshold:
        return MatchResult(photo_feature=pf, matched=None, r_norm=0.0, a_overlap=0.0)
    best = scored[0]
    runner_up = None
    if len(scored) > 1 and scored[1][1] >= threshold:
        runner_up = (scored[1][0].id, scored[1][1])
    return MatchResult(
        photo_feature=pf, matched=best[0], r_norm=best[1], a_overlap=best[2],
        runner_up=runner_up,
    )


def match_scene(pfs: list[PhotoFeature], gfs: list[GeoFeature], camera: CameraPose,
                threshold: float = DEFAULT_MATCH_THRESHOLD) -> list[MatchResult]:
    """One MatchResult per photo feature in input order.  Each map feature
    is assigned at most once: conflicts go to the higher r_norm, and losers
    rematch against the remaining candidates.
    """
    origin = LocalPoint(0.0, 0.0)
    scores: list[list[tuple[GeoFeature, float, float]]] = []
    for pf in pfs:
        sectors = sector_from_photo_feature(camera, pf)
        row = []
        for gf in candidate_filter(gfs, pf.category):
            r_norm, a_overlap = overlap_ratio(sectors, gf)
            if r_norm >= threshold:
                row.append((gf, r_norm, a_overlap))
        row.sort(key=lambda t: _rank_key(origin, t[0], t[1]))
        scores.append(row)

    assigned: dict[int, tuple[GeoFeature, float, float]] = {}
    taken: set[str] = set()
    while True:
        # best unassigned (pf, candidate) pair, greedily by r_norm
        best_i, best_entry = None, None
        for i, row in enumerate(scores):
            if i in assigned:
                continue
            entry = next((e for e in row if e[0].id not in taken), None)
            if entry is None:
                continue
            if best_entry is None or _rank_key(origin, entry[0], entry[1]) < _rank_key(
                origin, best_entry[0], best_entry[1]
            ):
                best_i, best_entry = i, entry
        if best_i is None:
            break
        assigned[best_i] = best_entry
        taken.add(best_entry[0].id)

    results = []
    for i, pf in enumerate(pfs):
        if i in assigned:
            gf, r_norm, a_overlap = assigned[i]
            remaining = [e for e in scores[i] if e[0].id not in taken and e[0].id != gf.id]
            runner_up = (remaining[0][0].id, remaining[0][1]) if remaining else None
            results.append(MatchResult(
                photo_feature=pf, matched=gf, r_norm=r_norm, a_overlap=a_overlap,
                runner_up=runner_up,
            ))
        else:
            results.append(MatchResult(photo_feature=pf, matched=None, r_norm=0.0, a_overlap=0.0))
    return results
