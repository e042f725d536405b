"""Overpass querying, OSM element parsing, and unification of nodes and
relations into way-level, matchable geo features.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import requests

from .geo_core import (
    EARTH_RADIUS_M,
    AngularInterval,
    DegeneratePolygon,
    GeoPoint,
    LocalPoint,
    Polygon,
    angular_extent,
    point_segment_distance,
    polyline_to_polygon,
)

if TYPE_CHECKING:
    from .scene_filter import CameraPose

logger = logging.getLogger(__name__)

DEFAULT_OVERPASS_ENDPOINT = "https://overpass-api.de/api/interpreter"
DEFAULT_RADIUS_M = 300.0
MIN_RADIUS_M, MAX_RADIUS_M = 50.0, 1000.0

NODE_ATTACH_DISTANCE_M = 15.0
STANDALONE_FOOTPRINT_M = 3.0


class IngestError(Exception):
    pass


class RadiusOutOfRange(IngestError):
    pass


class NetworkError(IngestError):
    pass


class RateLimited(NetworkError):
    pass


class FixtureNotFound(IngestError):
    pass


class MalformedDocument(IngestError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnresolvableMember(IngestError):
    pass


class FeatureCategory(Enum):
    BUILDING = "building"
    ROAD = "road"
    PARK = "park"
    NATURAL = "natural"
    WATERWAY = "waterway"
    OTHER = "other"


@dataclass
class OsmElement:
    """One parsed OSM primitive.  Unification passes mutate ways in place
    by appending to ``inclusive_info`` and consuming attached nodes.
    """

    kind: str  # node | way | relation
    id: int
    tags: dict[str, str] = field(default_factory=dict)
    coord: Optional[GeoPoint] = None  # nodes
    node_refs: list[int] = field(default_factory=list)  # ways
    geometry: list[GeoPoint] = field(default_factory=list)  # ways, resolved
    members: list[tuple[str, int, str]] = field(default_factory=list)  # relations
    inclusive_info: list[str] = field(default_factory=list)

    @property
    def ref(self) -> str:
        return f"{self.kind}/{self.id}"


@dataclass
class GeoFeature:
    """A unified map entity in the camera's local frame, ready for
    sector-overlap matching.
    """

    id: str
    geo_points: list[GeoPoint]
    closed: bool
    name: Optional[str]
    category: FeatureCategory
    local_polygon: Polygon
    distance_m: float
    angular_interval: AngularInterval
    inclusive_info: list[str] = field(default_factory=list)
    nearby_info: list[str] = field(default_factory=list)

    @property
    def display_name(self) -> str:
        return self.name or self.id


def build_overpass_query(center: GeoPoint, radius: float = DEFAULT_RADIUS_M) -> str:
    """Overpass QL statement fetching nodes, ways, and relations around a
    point, with tags and resolved geometry.
    """
    if not MIN_RADIUS_M <= radius <= MAX_RADIUS_M:
        raise RadiusOutOfRange(
            f"radius {radius} outside [{MIN_RADIUS_M}, {MAX_RADIUS_M}] m"
        )
    around = f"around:{radius:g},{center.lat!r},{center.lon!r}"
    return (
        "[out:json][timeout:60];\n"
        "(\n"
        f"  node({around});\n"
        f"  way({around});\n"
        f"  relation({around});\n"
        ");\n"
        "out body geom;\n"
    )


def fetch_elements(query: str, endpoint: str = DEFAULT_OVERPASS_ENDPOINT,
                   mode: str = "live", session: Optional[requests.Session] = None,
                   max_attempts: int = 3, backoff_base_s: float = 1.0) -> str:
    """Raw Overpass response document.

    In fixture mode ``endpoint`` is a filesystem path and the stored
    document is returned verbatim.  Live mode retries transient failures
    with exponential backoff.
    """
    if mode == "fixture":
        path = Path(endpoint)
        if not path.is_file():
            raise FixtureNotFound(f"fixture file not found: {path}")
        return path.read_text(encoding="utf-8")

    session = session or requests.Session()
    last_error: Exception | None = None
    for attempt in range(max_attempts):
        if attempt:
            time.sleep(backoff_base_s * 2 ** (attempt - 1))
        try:
            resp = session.post(endpoint, data={"data": query}, timeout=60)
        except requests.RequestException as exc:
            last_error = exc
            logger.warning("overpass request failed (attempt %d): %s", attempt + 1, exc)
            continue
        if resp.status_code == 429:
            last_error = RateLimited(f"rate limited by {endpoint}")
            logger.warning("overpass rate limited (attempt %d)", attempt + 1)
            continue
        if resp.status_code >= 500:
            last_error = NetworkError(f"server error {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise NetworkError(f"overpass returned HTTP {resp.status_code}")
        return resp.text
    if isinstance(last_error, RateLimited):
        raise last_error
    raise NetworkError(f"overpass unreachable after {max_attempts} attempts: {last_error}")


def parse_overpass(doc: str) -> list[OsmElement]:
    """Parse a raw Overpass JSON response into typed elements.  Unknown
    element kinds are skipped with a warning.
    """
    try:
        payload = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(exc.msg, offset=exc.pos) from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("elements"), list):
        raise MalformedDocument("missing 'elements' array")

    elements: list[OsmElement] = []
    skipped = 0
    for raw in payload["elements"]:
        kind = raw.get("type")
        tags = {str(k): str(v) for k, v in (raw.get("tags") or {}).items() if k}
        if kind == "node":
            elements.append(OsmElement(
                kind="node", id=int(raw["id"]), tags=tags,
                coord=GeoPoint(float(raw["lat"]), float(raw["lon"])),
            ))
        elif kind == "way":
            geometry = [
                GeoPoint(float(g["lat"]), float(g["lon"]))
                for g in raw.get("geometry") or []
                if g is not None
            ]
            elements.append(OsmElement(
                kind="way", id=int(raw["id"]), tags=tags,
                node_refs=[int(n) for n in raw.get("nodes") or []],
                geometry=geometry,
            ))
        elif kind == "relation":
            members = [
                (str(m.get("type")), int(m.get("ref")), str(m.get("role") or ""))
                for m in raw.get("members") or []
            ]
            elements.append(OsmElement(
                kind="relation", id=int(raw["id"]), tags=tags, members=members,
            ))
        else:
            skipped += 1
    if skipped:
        logger.warning("skipped %d elements of unknown kind", skipped)
    return elements


def serialize_elements(elements: list[OsmElement]) -> str:
    """Render elements back into an Overpass-style JSON document (used for
    model-level round-trip checks).
    """
    out = []
    for el in elements:
        raw: dict = {"type": el.kind, "id": el.id}
        if el.tags:
            raw["tags"] = dict(el.tags)
        if el.kind == "node" and el.coord is not None:
            raw["lat"], raw["lon"] = el.coord.lat, el.coord.lon
        elif el.kind == "way":
            raw["nodes"] = list(el.node_refs)
            raw["geometry"] = [{"lat": p.lat, "lon": p.lon} for p in el.geometry]
        elif el.kind == "relation":
            raw["members"] = [
                {"type": k, "ref": r, "role": role} for k, r, role in el.members
            ]
        out.append(raw)
    return json.dumps({"elements": out})


def _resolve_way_geometry(way: OsmElement, nodes_by_id: dict[int, OsmElement]) -> list[GeoPoint]:
    if way.geometry:
        return way.geometry
    coords = []
    for ref in way.node_refs:
        node = nodes_by_id.get(ref)
        if node is not None and node.coord is not None:
            coords.append(node.coord)
    way.geometry = coords
    return coords


def _summarize_node(node: OsmElement) -> str:
    name = node.tags.get("name")
    primary = next(
        (f"{k}={v}" for k, v in sorted(node.tags.items()) if k != "name"), None
    )
    if name and primary:
        return f"{name} ({primary})"
    return name or primary or node.ref


def _is_closed(way: OsmElement) -> bool:
    if way.tags.get("area") == "yes" or "building" in way.tags:
        return True
    if way.node_refs and way.node_refs[0] == way.node_refs[-1]:
        return True
    pts = way.geometry
    return len(pts) > 3 and pts[0] == pts[-1]


def embed_nodes_into_ways(elements: list[OsmElement]) -> list[OsmElement]:
    """Attach tagged nodes to the way containing them, else the nearest way
    within 15 m.  Unattached tagged nodes stay standalone; untagged nodes
    are consumed as pure geometry.
    """
    nodes_by_id = {el.id: el for el in elements if el.kind == "node"}
    ways = [el for el in elements if el.kind == "way"]
    way_local: list[tuple[OsmElement, list[GeoPoint], bool]] = []
    for way in ways:
        coords = _resolve_way_geometry(way, nodes_by_id)
        if len(coords) >= 2:
            way_local.append((way, coords, _is_closed(way)))

    result: list[OsmElement] = []
    for el in elements:
        if el.kind != "node":
            result.append(el)
            continue
        if not el.tags or el.coord is None:
            continue  # pure geometry
        attached = _attach_node(el, way_local)
        if attached is not None:
            attached.inclusive_info.append(_summarize_node(el))
        else:
            result.append(el)  # standalone point feature
    return result


def _attach_node(node: OsmElement, way_local) -> Optional[OsmElement]:
    origin = node.coord
    best_way, best_dist = None, NODE_ATTACH_DISTANCE_M
    for way, coords, closed in way_local:
        local = [_project_unchecked(origin, p) for p in coords]
        if closed and len(local) >= 3:
            try:
                if Polygon(local).contains(LocalPoint(0.0, 0.0)):
                    return way
            except DegeneratePolygon:
                pass
        dist = min(
            point_segment_distance(LocalPoint(0.0, 0.0), a, b)
            for a, b in zip(local, local[1:])
        )
        if dist <= best_dist:
            best_way, best_dist = way, dist
    return best_way


def lift_relations_to_ways(elements: list[OsmElement]) -> list[OsmElement]:
    """Fold relation identity into member ways: relation name/type tags go
    to outer-role members (all members when no roles are present), and
    multipolygon relations donate their tags to their outer rings.
    """
    ways_by_id = {el.id: el for el in elements if el.kind == "way"}
    result: list[OsmElement] = []
    for el in elements:
        if el.kind != "relation":
            result.append(el)
            continue
        way_members = [(r, role) for k, r, role in el.members if k == "way"]
        has_roles = any(role for _, role in way_members)
        targets = []
        for ref, role in way_members:
            if has_roles and role != "outer":
                continue
            way = ways_by_id.get(ref)
            if way is None:
                logger.warning("relation %s: %s", el.ref, UnresolvableMember(f"way/{ref} absent"))
                continue
            targets.append(way)
        summary = _summarize_relation(el)
        for way in targets:
            if summary:
                way.inclusive_info.append(summary)
            if el.tags.get("type") == "multipolygon":
                for k, v in el.tags.items():
                    if k != "type":
                        way.tags.setdefault(k, v)
    return result


def _summarize_relation(rel: OsmElement) -> Optional[str]:
    rel_type = rel.tags.get("type")
    name = rel.tags.get("name")
    if rel_type and name:
        return f"{rel_type}: {name}"
    return name or (f"relation type={rel_type}" if rel_type else None)


def categorize(tags: dict[str, str]) -> FeatureCategory:
    """Map OSM tags onto the five core categories (waterway checks precede
    plain natural so that natural=water lands in WATERWAY).
    """
    if "building" in tags:
        return FeatureCategory.BUILDING
    if "highway" in tags:
        return FeatureCategory.ROAD
    if tags.get("leisure") in ("park", "garden") or tags.get("landuse") == "park":
        return FeatureCategory.PARK
    if "waterway" in tags or tags.get("natural") == "water":
        return FeatureCategory.WATERWAY
    if "natural" in tags:
        return FeatureCategory.NATURAL
    return FeatureCategory.OTHER


def _line_width_for(tags: dict[str, str]) -> float:
    if tags.get("highway") in ("footway", "path", "cycleway", "steps", "pedestrian"):
        return 2.0
    if "waterway" in tags:
        return 10.0
    return 6.0


def _project_unchecked(origin: GeoPoint, p: GeoPoint) -> LocalPoint:
    # like geo_core.project_local but without the 2 km bound, for way
    # vertices that trail outside the query radius
    import math

    x = EARTH_RADIUS_M * math.radians(p.lon - origin.lon) * math.cos(math.radians(origin.lat))
    y = EARTH_RADIUS_M * math.radians(p.lat - origin.lat)
    return LocalPoint(x, y)


def build_geo_features(elements: list[OsmElement], camera: "CameraPose") -> list[GeoFeature]:
    """Project unified elements into the camera's local frame and derive
    category, distance, and angular interval for each.
    """
    origin = camera.position
    features: list[GeoFeature] = []
    for el in elements:
        if el.kind == "way":
            feature = _feature_from_way(el, origin)
        elif el.kind == "node":
            feature = _feature_from_standalone_node(el, origin)
        else:
            continue
        if feature is None:
            continue
        if feature.category is FeatureCategory.OTHER and not feature.name:
            continue
        features.append(feature)
    return features


def _feature_from_way(way: OsmElement, origin: GeoPoint) -> Optional[GeoFeature]:
    coords = way.geometry
    if len(coords) < 2:
        return None
    local = [_project_unchecked(origin, p) for p in coords]
    closed = _is_closed(way)
    try:
        if closed and len(local) >= 3:
            polygon = Polygon(local)
        else:
            polygon = polyline_to_polygon(local, _line_width_for(way.tags))
    except (DegeneratePolygon, ValueError):
        return None
    return _finish_feature(way.ref, coords, closed, way.tags, way.inclusive_info, polygon)


def _feature_from_standalone_node(node: OsmElement, origin: GeoPoint) -> Optional[GeoFeature]:
    if node.coord is None or not node.tags:
        return None
    c = _project_unchecked(origin, node.coord)
    h = STANDALONE_FOOTPRINT_M / 2.0
    square = Polygon([
        LocalPoint(c.x - h, c.y - h), LocalPoint(c.x + h, c.y - h),
        LocalPoint(c.x + h, c.y + h), LocalPoint(c.x - h, c.y + h),
    ])
    return _finish_feature(node.ref, [node.coord], True, node.tags, node.inclusive_info, square)


def _finish_feature(ref: str, coords: list[GeoPoint], closed: bool, tags: dict[str, str],
                    inclusive: list[str], polygon: Polygon) -> GeoFeature:
    cam = LocalPoint(0.0, 0.0)
    verts = polygon.vertices
    if polygon.contains(cam):
        distance = 0.0
    else:
        distance = min(
            point_segment_distance(cam, verts[i], verts[(i + 1) % len(verts)])
            for i in range(len(verts))
        )
    return GeoFeature(
        id=ref,
        geo_points=list(coords),
        closed=closed,
        name=tags.get("name"),
        category=categorize(tags),
        local_polygon=polygon,
        distance_m=distance,
        angular_interval=angular_extent(cam, polygon),
        inclusive_info=list(inclusive),
    )
