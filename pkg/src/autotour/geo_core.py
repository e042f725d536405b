"""Geodesy and planar geometry: projections, bearings, polygon areas,
convex clipping, and annular-sector overlap computation.

All bearings are degrees clockwise from true north in [0, 360).  Local
coordinates are meters east (x) / north (y) of a projection origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
PROJECTION_RANGE_M = 2_000.0

DEGENERATE_AREA_M2 = 1e-9


class GeometryError(ValueError):
    """Base class for geometry domain errors."""


class CoincidentPoints(GeometryError):
    pass


class OutOfProjectionRange(GeometryError):
    pass


class DegeneratePolygon(GeometryError):
    pass


class DegenerateLine(GeometryError):
    pass


def normalize_bearing(deg: float) -> float:
    """Wrap an angle into [0, 360)."""
    return deg % 360.0


def normalize_relative(deg: float) -> float:
    """Wrap an angle into (-180, 180]."""
    d = deg % 360.0
    if d > 180.0:
        d -= 360.0
    return d


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 latitude/longitude in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinates: ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon < 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")


@dataclass(frozen=True)
class LocalPoint:
    """Meters east/north of the projection origin."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite local point: ({self.x}, {self.y})")

    def distance_to(self, other: "LocalPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class AngularInterval:
    """An arc of bearings running clockwise from ``start`` to ``end``.

    ``wraps`` is true when the arc crosses north.  A full circle is
    represented as start == end (span 360).
    """

    start: float
    end: float
    wraps: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", normalize_bearing(self.start))
        object.__setattr__(self, "end", normalize_bearing(self.end))
        object.__setattr__(self, "wraps", self.end < self.start)

    @property
    def span(self) -> float:
        s = (self.end - self.start) % 360.0
        return 360.0 if s == 0.0 else s

    @property
    def is_full(self) -> bool:
        return self.span >= 360.0

    def midpoint(self) -> float:
        return normalize_bearing(self.start + self.span / 2.0)

    def contains(self, bearing: float) -> bool:
        if self.is_full:
            return True
        offset = (normalize_bearing(bearing) - self.start) % 360.0
        return offset <= self.span

    def intersects(self, other: "AngularInterval") -> bool:
        if self.is_full or other.is_full:
            return True
        return (
            self.contains(other.start)
            or self.contains(other.end)
            or other.contains(self.start)
        )

    @staticmethod
    def full() -> "AngularInterval":
        return AngularInterval(0.0, 0.0)


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a spherical Earth."""
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def initial_bearing(origin: GeoPoint, target: GeoPoint) -> float:
    """Bearing from origin toward target, clockwise from true north."""
    if origin == target:
        raise CoincidentPoints(f"bearing undefined for coincident points {origin}")
    phi1, phi2 = math.radians(origin.lat), math.radians(target.lat)
    dlam = math.radians(target.lon - origin.lon)
    y = math.sin(dlam) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    return normalize_bearing(math.degrees(math.atan2(y, x)))


def project_local(origin: GeoPoint, p: GeoPoint) -> LocalPoint:
    """Equirectangular projection onto the tangent plane at ``origin``."""
    if haversine_distance(origin, p) > PROJECTION_RANGE_M:
        raise OutOfProjectionRange(
            f"{p} is farther than {PROJECTION_RANGE_M} m from projection origin"
        )
    x = EARTH_RADIUS_M * math.radians(p.lon - origin.lon) * math.cos(math.radians(origin.lat))
    y = EARTH_RADIUS_M * math.radians(p.lat - origin.lat)
    return LocalPoint(x, y)


def unproject_local(origin: GeoPoint, p: LocalPoint) -> GeoPoint:
    """Inverse of :func:`project_local`."""
    lat = origin.lat + math.degrees(p.y / EARTH_RADIUS_M)
    lon = origin.lon + math.degrees(p.x / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat))))
    return GeoPoint(lat, lon)


class Polygon:
    """A simple closed polygon in local coordinates, normalized to
    counterclockwise orientation.  The closing edge is implicit.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices) -> None:
        pts = [v if isinstance(v, LocalPoint) else LocalPoint(*v) for v in vertices]
        # drop consecutive duplicates, including the wrap-around pair
        cleaned: list[LocalPoint] = []
        for v in pts:
            if not cleaned or v.distance_to(cleaned[-1]) > 1e-12:
                cleaned.append(v)
        if len(cleaned) > 1 and cleaned[0].distance_to(cleaned[-1]) <= 1e-12:
            cleaned.pop()
        if len(cleaned) < 3:
            raise DegeneratePolygon(f"polygon needs >= 3 distinct vertices, got {len(cleaned)}")
        if abs(_signed_area(cleaned)) < DEGENERATE_AREA_M2:
            raise DegeneratePolygon("polygon area below degeneracy threshold")
        if _signed_area(cleaned) < 0:
            cleaned.reverse()
        self.vertices = tuple(cleaned)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __repr__(self) -> str:
        return f"Polygon({len(self.vertices)} vertices)"

    def as_array(self) -> np.ndarray:
        return np.array([(v.x, v.y) for v in self.vertices], dtype=float)

    def centroid(self) -> LocalPoint:
        a = self.as_array()
        b = np.roll(a, -1, axis=0)
        cross = a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]
        area = cross.sum() / 2.0
        cx = ((a[:, 0] + b[:, 0]) * cross).sum() / (6.0 * area)
        cy = ((a[:, 1] + b[:, 1]) * cross).sum() / (6.0 * area)
        return LocalPoint(cx, cy)

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon([LocalPoint(v.x + dx, v.y + dy) for v in self.vertices])

    def contains(self, p: LocalPoint) -> bool:
        """Crossing-number point-in-polygon test (boundary counts as inside)."""
        inside = False
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            if _point_on_segment(p, a, b):
                return True
            if (a.y > p.y) != (b.y > p.y):
                x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
                if x_cross > p.x:
                    inside = not inside
        return inside


def _signed_area(vertices) -> float:
    total = 0.0
    n = len(vertices)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        total += a.x * b.y - b.x * a.y
    return total / 2.0


def _point_on_segment(p: LocalPoint, a: LocalPoint, b: LocalPoint, eps: float = 1e-9) -> bool:
    cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    if abs(cross) > eps * max(1.0, a.distance_to(b)):
        return False
    dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)
    return -eps <= dot <= a.distance_to(b) ** 2 + eps


def point_segment_distance(p: LocalPoint, a: LocalPoint, b: LocalPoint) -> float:
    """Distance from a point to a line segment."""
    seg_len2 = (b.x - a.x) ** 2 + (b.y - a.y) ** 2
    if seg_len2 == 0.0:
        return p.distance_to(a)
    t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / seg_len2
    t = max(0.0, min(1.0, t))
    return p.distance_to(LocalPoint(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))


def polygon_area(poly: Polygon) -> float:
    """Unsigned shoelace area in square meters."""
    area = abs(_signed_area(poly.vertices))
    if area < DEGENERATE_AREA_M2:
        raise DegeneratePolygon("polygon area below degeneracy threshold")
    return area


@dataclass(frozen=True)
class AnnularSector:
    """A half-ring-shaped search region: two radii and a clockwise arc of
    bearings centered at the camera position.
    """

    center: LocalPoint
    r_inner: float
    r_outer: float
    bearing_start: float
    bearing_end: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_inner < self.r_outer:
            raise ValueError(f"invalid radii: inner {self.r_inner}, outer {self.r_outer}")
        object.__setattr__(self, "bearing_start", normalize_bearing(self.bearing_start))
        object.__setattr__(self, "bearing_end", normalize_bearing(self.bearing_end))
        if not 0.0 < self.span <= 180.0:
            raise ValueError(f"sector span must be in (0, 180], got {self.span}")

    @property
    def span(self) -> float:
        s = (self.bearing_end - self.bearing_start) % 360.0
        return 360.0 if s == 0.0 else s

    @property
    def area(self) -> float:
        """Analytic area of the (undiscretized) sector."""
        return (self.span / 360.0) * math.pi * (self.r_outer**2 - self.r_inner**2)

    def interval(self) -> AngularInterval:
        return AngularInterval(self.bearing_start, self.bearing_end)


def _bearing_unit(bearing_deg: float) -> tuple[float, float]:
    rad = math.radians(bearing_deg)
    return math.sin(rad), math.cos(rad)


def _arc_points(center: LocalPoint, r: float, bearing_start: float, span: float,
                segments: int) -> list[LocalPoint]:
    """Chord points along the arc, clockwise from bearing_start, inclusive."""
    pts = []
    for i in range(segments + 1):
        ux, uy = _bearing_unit(bearing_start + span * i / segments)
        pts.append(LocalPoint(center.x + r * ux, center.y + r * uy))
    return pts


def sector_polygonize(s: AnnularSector, arc_segments: int = 32) -> Polygon:
    """Discretize a sector into a polygon using ``arc_segments`` chords
    along its arc.  A zero inner radius collapses the inner arc to the
    center point.
    """
    if arc_segments < 8:
        raise ValueError(f"arc_segments must be >= 8, got {arc_segments}")
    outer = _arc_points(s.center, s.r_outer, s.bearing_start, s.span, arc_segments)
    if s.r_inner <= 0.0:
        return Polygon([s.center, *outer])
    inner = _arc_points(s.center, s.r_inner, s.bearing_start, s.span, arc_segments)
    return Polygon([*outer, *reversed(inner)])


def clip_convex(subject: list[LocalPoint], clip: list[LocalPoint]) -> list[LocalPoint]:
    """Sutherland-Hodgman clip of an arbitrary subject polygon against a
    convex, counterclockwise clip polygon.  Returns raw vertices (possibly
    fewer than 3 when the intersection is empty or degenerate).
    """
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        ax, ay = clip[i].x, clip[i].y
        bx, by = clip[(i + 1) % n].x, clip[(i + 1) % n].y
        ex, ey = bx - ax, by - ay

        def inside(p: LocalPoint) -> bool:
            return ex * (p.y - ay) - ey * (p.x - ax) >= 0.0

        def intersection(p: LocalPoint, q: LocalPoint) -> LocalPoint:
            dx, dy = q.x - p.x, q.y - p.y
            denom = ex * dy - ey * dx
            if denom == 0.0:
                return q
            t = (ex * (ay - p.y) - ey * (ax - p.x)) / denom
            return LocalPoint(p.x + t * dx, p.y + t * dy)

        input_list = output
        output = []
        prev = input_list[-1]
        prev_in = inside(prev)
        for cur in input_list:
            cur_in = inside(cur)
            if cur_in:
                if not prev_in:
                    output.append(intersection(prev, cur))
                output.append(cur)
            elif prev_in:
                output.append(intersection(prev, cur))
            prev, prev_in = cur, cur_in
    return output


def _clipped_area(subject: Polygon, clip: list[LocalPoint]) -> float:
    verts = clip_convex(list(subject.vertices), clip)
    if len(verts) < 3:
        return 0.0
    return abs(_signed_area(verts))


def _pie_pieces(center: LocalPoint, r: float, bearing_start: float, span: float,
                arc_segments: int) -> list[list[LocalPoint]]:
    """Split a pie slice into convex pieces of at most 90 degrees, each a
    CCW chord polygon hinged at the center.
    """
    n_pieces = max(1, math.ceil(span / 90.0))
    piece_span = span / n_pieces
    pieces = []
    for k in range(n_pieces):
        start = bearing_start + k * piece_span
        # never let a chord subtend more than 1 degree: the sagitta error of
        # a coarse chord shows up directly in the clipped area
        segs = max(4, math.ceil(arc_segments * piece_span / span),
                   math.ceil(piece_span))
        arc = _arc_points(center, r, start, piece_span, segs)
        # a clockwise bearing sweep is clockwise in xy; reverse for CCW clip order
        pieces.append([center, *reversed(arc)])
    return pieces


def overlap_area(s: AnnularSector, poly: Polygon, arc_segments: int = 32) -> float:
    """Area of the intersection of a sector and a polygon, computed as
    overlap with the outer pie minus overlap with the inner pie.
    """
    outer = sum(
        _clipped_area(poly, piece)
        for piece in _pie_pieces(s.center, s.r_outer, s.bearing_start, s.span, arc_segments)
    )
    inner = 0.0
    if s.r_inner > 0.0:
        inner = sum(
            _clipped_area(poly, piece)
            for piece in _pie_pieces(s.center, s.r_inner, s.bearing_start, s.span, arc_segments)
        )
    area = outer - inner
    return max(0.0, min(area, s.area, polygon_area(poly)))


def angular_extent(origin: LocalPoint, poly: Polygon) -> AngularInterval:
    """Smallest interval of bearings from origin covering the polygon.

    Returns the full circle when the origin lies inside the polygon.
    """
    if poly.contains(origin):
        return AngularInterval.full()

    # Each edge subtends the short arc between its endpoint bearings.
    bearings = []
    for v in poly.vertices:
        d = origin.distance_to(v)
        if d < 1e-12:
            return AngularInterval.full()
        bearings.append(normalize_bearing(math.degrees(math.atan2(v.x - origin.x, v.y - origin.y))))

    # Each edge subtends the short arc between its endpoint bearings.
    # Consecutive edges share an endpoint, so the running union stays a
    # single connected arc and can be grown incrementally.
    n = len(bearings)
    current = None
    for i in range(n):
        b0, b1 = bearings[i], bearings[(i + 1) % n]
        diff = (b1 - b0) % 360.0
        if diff < 1e-12 or diff > 360.0 - 1e-12:
            continue  # degenerate edge arc; covered via shared endpoints
        arc = AngularInterval(b0, b1) if diff <= 180.0 else AngularInterval(b1, b0)
        if current is None:
            current = arc
        else:
            current = _union_connected(current, arc)
            if current is None:
                return AngularInterval.full()
    return current if current is not None else AngularInterval.full()


def _union_connected(a: AngularInterval, b: AngularInterval):
    """Union of two overlapping arcs; None when the union is the full circle."""
    a_has_bs, a_has_be = a.contains(b.start), a.contains(b.end)
    b_has_as, b_has_ae = b.contains(a.start), b.contains(a.end)
    if a_has_bs and a_has_be:
        if b_has_as and b_has_ae and a.span + b.span >= 360.0:
            return None
        return a
    if b_has_as and b_has_ae:
        return b
    if a_has_bs:
        return AngularInterval(a.start, b.end)
    if a_has_be:
        return AngularInterval(b.start, a.end)
    # floating-point slip at the shared endpoint: pick the smaller covering arc
    c1 = AngularInterval(a.start, b.end)
    c2 = AngularInterval(b.start, a.end)
    return c1 if c1.span <= c2.span else c2


DEFAULT_LINE_WIDTHS = {"road": 6.0, "waterway": 10.0, "footway": 2.0}


def polyline_to_polygon(line, width: float) -> Polygon:
    """Buffer an open polyline into a corridor polygon of the given width
    (flat caps, mitred joins).
    """
    from shapely.geometry import LineString, MultiPolygon

    pts = [p if isinstance(p, LocalPoint) else LocalPoint(*p) for p in line]
    distinct = []
    for p in pts:
        if not distinct or p.distance_to(distinct[-1]) > 1e-12:
            distinct.append(p)
    if len(distinct) < 2:
        raise DegenerateLine(f"polyline needs >= 2 distinct points, got {len(distinct)}")
    if width <= 0.0:
        raise ValueError(f"width must be positive, got {width}")

    buffered = LineString([(p.x, p.y) for p in distinct]).buffer(
        width / 2.0, cap_style="flat", join_style="mitre", mitre_limit=2.0
    )
    if isinstance(buffered, MultiPolygon):
        buffered = max(buffered.geoms, key=lambda g: g.area)
    return Polygon([LocalPoint(x, y) for x, y in buffered.exterior.coords])
