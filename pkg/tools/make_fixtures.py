#!/usr/bin/env python3
"""Deterministically generate the fixture scenes under fixtures/.

Two scenes are produced:

* harbour_walk — a small hand-placed scene whose detection transcript is
  the canonical three-feature sample (two buildings flanking an elevated
  walkway), with grounding and box-fix responses for each label.
* campus_300m — a synthetic 300 m campus snapshot with exactly 451
  nodes, 59 ways, and 1 relation, plus one hand-placed landmark wired to
  a canned detection line so the scene runs end to end offline.

Run from the repository root:  python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
import math
import random
import sys
from pathlib import Path

from PIL import Image, ImageDraw

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from autotour.photo_features import input_digest  # noqa: E402

EARTH_RADIUS_M = 6_371_000.0

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


def geo_from_local(lat0: float, lon0: float, x: float, y: float) -> tuple[float, float]:
    lat = lat0 + math.degrees(y / EARTH_RADIUS_M)
    lon = lon0 + math.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return round(lat, 7), round(lon, 7)


class DocBuilder:
    """Accumulates Overpass-style elements with locally-assigned ids."""

    def __init__(self, lat0: float, lon0: float):
        self.lat0, self.lon0 = lat0, lon0
        self.elements: list[dict] = []
        self._next_node = 1

    def node(self, x: float, y: float, tags: dict | None = None,
             node_id: int | None = None) -> int:
        nid = node_id if node_id is not None else self._next_node
        self._next_node = max(self._next_node, nid + 1)
        lat, lon = geo_from_local(self.lat0, self.lon0, x, y)
        el = {"type": "node", "id": nid, "lat": lat, "lon": lon}
        if tags:
            el["tags"] = tags
        self.elements.append(el)
        return nid

    def way(self, way_id: int, points: list[tuple[float, float]], tags: dict,
            closed: bool) -> int:
        refs = [self.node(x, y) for x, y in points]
        if closed:
            refs = refs + [refs[0]]
            points = points + [points[0]]
        geometry = []
        for x, y in points:
            lat, lon = geo_from_local(self.lat0, self.lon0, x, y)
            geometry.append({"lat": lat, "lon": lon})
        self.elements.append({
            "type": "way", "id": way_id, "nodes": refs,
            "geometry": geometry, "tags": tags,
        })
        return way_id

    def relation(self, rel_id: int, members: list[tuple[str, int, str]], tags: dict) -> int:
        self.elements.append({
            "type": "relation", "id": rel_id, "tags": tags,
            "members": [{"type": k, "ref": r, "role": role} for k, r, role in members],
        })
        return rel_id

    def counts(self) -> dict:
        counts = {"node": 0, "way": 0, "relation": 0}
        for el in self.elements:
            counts[el["type"]] += 1
        return counts

    def document(self) -> str:
        return json.dumps(
            {"version": 0.6, "generator": "fixture-synth", "elements": self.elements},
            indent=1,
        ) + "\n"


def square(cx: float, cy: float, half: float) -> list[tuple[float, float]]:
    return [
        (cx - half, cy - half), (cx + half, cy - half),
        (cx + half, cy + half), (cx - half, cy + half),
    ]


def bearing_point(bearing_deg: float, dist_m: float) -> tuple[float, float]:
    b = math.radians(bearing_deg)
    return dist_m * math.sin(b), dist_m * math.cos(b)


def write_vlm(scene_dir: Path, detect_text: str, grounds: dict[str, list[float]],
              fixes: dict[str, dict]) -> None:
    vlm = scene_dir / "vlm"
    (vlm / "detect").mkdir(parents=True, exist_ok=True)
    (vlm / "ground").mkdir(parents=True, exist_ok=True)
    (vlm / "fix").mkdir(parents=True, exist_ok=True)
    (vlm / "detect" / "default.txt").write_text(detect_text, encoding="utf-8")
    for label, box in grounds.items():
        payload = json.dumps({"label": label, "bounding_box": box}, indent=2) + "\n"
        (vlm / "ground" / f"{input_digest('ground', label)}.txt").write_text(
            payload, encoding="utf-8"
        )
    for label, decision in fixes.items():
        (vlm / "fix" / f"{input_digest('fix', label)}.txt").write_text(
            json.dumps(decision, indent=2) + "\n", encoding="utf-8"
        )


def write_photo(path: Path, seed: int) -> None:
    """Small deterministic placeholder photo (streetscape color blocks)."""
    rng = random.Random(seed)
    img = Image.new("RGB", (160, 120), (150, 190, 230))
    draw = ImageDraw.Draw(img)
    draw.rectangle([0, 80, 160, 120], fill=(90, 90, 95))
    for _ in range(6):
        x0 = rng.randrange(0, 130)
        w = rng.randrange(15, 35)
        h = rng.randrange(30, 70)
        shade = rng.randrange(120, 200)
        draw.rectangle([x0, 85 - h, x0 + w, 85], fill=(shade, shade - 10, shade - 20))
    img.save(path, format="PNG")


def make_harbour_walk() -> None:
    lat0, lon0 = 22.3364, 114.2655
    scene = FIXTURES / "harbour_walk"
    scene.mkdir(parents=True, exist_ok=True)
    doc = DocBuilder(lat0, lon0)

    # left building: centred 18 m out at bearing 310°
    cx, cy = bearing_point(310.0, 18.0)
    doc.way(101, square(cx, cy, 6.0),
            {"building": "residential", "name": "Harbour View Mansion"}, closed=True)
    # elevated walkway crossing straight ahead at ~12 m
    doc.way(102, [(-20.0, 12.0), (0.0, 12.0), (20.0, 12.0)],
            {"highway": "footway", "bridge": "yes", "name": "Harbour Footbridge"},
            closed=False)
    # right building: centred 28 m out at bearing 50°
    cx, cy = bearing_point(50.0, 28.0)
    doc.way(103, square(cx, cy, 7.0),
            {"building": "apartments", "name": "Pier Crest Tower"}, closed=True)
    # building fully hidden behind the left building (occlusion case)
    cx, cy = bearing_point(310.0, 45.0)
    doc.way(104, square(cx, cy, 4.0),
            {"building": "yes", "name": "Hidden Annex"}, closed=True)
    # park behind the camera, outside the field of view
    doc.way(105, square(0.0, -40.0, 10.0),
            {"leisure": "park", "name": "South Lawn"}, closed=True)
    # cafe inside the left building -> becomes inclusive info
    cx, cy = bearing_point(310.0, 18.0)
    doc.node(cx, cy, {"amenity": "cafe", "name": "Cafe Corner"}, node_id=900)
    # walking route over the footbridge
    doc.relation(301, [("way", 102, "")], {"type": "route", "route": "foot",
                                           "name": "Harbour Loop"})

    (scene / "overpass.json").write_text(doc.document(), encoding="utf-8")

    detect_text = (
        "[left 70° to left 30°] — [Multi-storey building (left)] — "
        "[White building with balconies] — [~20 m]\n"
        "[left 10° to right 10°] — [Elevated walkway] — "
        "[Pedestrian bridge with a roof] — [~5–20 m]\n"
        "[right 30° to right 70°] — [Multi-storey building (right)] — "
        "[Tall building with red/white façade] — [~30 m]\n"
    )
    grounds = {
        "Multi-storey building (left)": [0.0, 0.0, 0.38, 1.0],
        "Elevated walkway": [0.30, 0.35, 0.70, 0.65],
        "Multi-storey building (right)": [0.50, 0.0, 1.0, 1.0],
    }
    fixes = {
        # the judge widens the right building's draft box
        "Multi-storey building (right)": {
            "label": "Multi-storey building (right)",
            "modified": "yes",
            "bounding_box": [0.27, 0.0, 1.0, 1.0],
        },
    }
    write_vlm(scene, detect_text, grounds, fixes)
    write_photo(scene / "photo.png", seed=31001)

    manifest = {
        "name": "harbour_walk",
        "center": {"lat": lat0, "lon": lon0},
        "radius_m": 300.0,
        "camera": {"heading_deg": 0.0, "fov_deg": 70.0, "fov_margin_deg": 15.0},
        "photo": "photo.png",
        "element_counts": doc.counts(),
    }
    (scene / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    truth = {
        "features": [
            {"name": "Multi-storey building (left)", "osm_id": "way/101"},
            {"name": "Elevated walkway", "osm_id": "way/102"},
            {"name": "Multi-storey building (right)", "osm_id": "way/103"},
        ]
    }
    (scene / "ground_truth.json").write_text(
        json.dumps(truth, indent=2) + "\n", encoding="utf-8"
    )


def make_campus_300m() -> None:
    lat0, lon0 = 39.9042, 116.4074
    heading = 45.0
    scene = FIXTURES / "campus_300m"
    scene.mkdir(parents=True, exist_ok=True)
    doc = DocBuilder(lat0, lon0)
    rng = random.Random(20260823)

    # hand-placed landmark straight down the camera heading
    cx, cy = bearing_point(heading, 35.0)
    doc.way(5001, square(cx, cy, 8.0),
            {"building": "university", "name": "Campus Library"}, closed=True)

    # 44 generated buildings (4 corner nodes each)
    for i in range(44):
        bearing = rng.uniform(0.0, 360.0)
        dist = rng.uniform(60.0, 280.0)
        cx, cy = bearing_point(bearing, dist)
        half = rng.uniform(5.0, 15.0)
        tags = {"building": rng.choice(["yes", "residential", "commercial"])}
        if rng.random() < 0.5:
            tags["name"] = f"Building {i + 1}"
        doc.way(5100 + i, square(cx, cy, half), tags, closed=True)

    # 13 open road ways (5 nodes each)
    for i in range(13):
        bearing = rng.uniform(0.0, 360.0)
        sx, sy = bearing_point(bearing, rng.uniform(20.0, 250.0))
        step = math.radians(rng.uniform(0.0, 360.0))
        pts = []
        x, y = sx, sy
        for _ in range(5):
            pts.append((x, y))
            x += 40.0 * math.sin(step) + rng.uniform(-5.0, 5.0)
            y += 40.0 * math.cos(step) + rng.uniform(-5.0, 5.0)
        tags = {"highway": rng.choice(["residential", "footway", "service"])}
        if rng.random() < 0.4:
            tags["name"] = f"Campus Road {i + 1}"
        doc.way(5200 + i, pts, tags, closed=False)

    # one park (6 perimeter nodes)
    px, py = bearing_point(200.0, 120.0)
    park_pts = [
        (px + 40.0 * math.sin(math.radians(a)), py + 40.0 * math.cos(math.radians(a)))
        for a in range(0, 360, 60)
    ]
    doc.way(5300, park_pts, {"leisure": "park", "name": "Central Green"}, closed=True)

    # standalone nodes (trees, amenities, plain survey points) up to 451 total
    target_nodes = 451
    current = doc.counts()["node"]
    for i in range(target_nodes - current):
        bearing = rng.uniform(0.0, 360.0)
        dist = rng.uniform(10.0, 290.0)
        x, y = bearing_point(bearing, dist)
        roll = rng.random()
        if roll < 0.4:
            tags = {"natural": "tree"}
        elif roll < 0.55:
            tags = {"amenity": rng.choice(["bench", "cafe", "bicycle_parking"])}
        else:
            tags = None  # plain survey point, pure geometry
        doc.node(x, y, tags, node_id=9000 + i)

    doc.relation(6001, [("way", 5200, ""), ("way", 5201, "")],
                 {"type": "route", "route": "foot", "name": "Campus Loop"})

    counts = doc.counts()
    assert counts == {"node": 451, "way": 59, "relation": 1}, counts
    (scene / "overpass.json").write_text(doc.document(), encoding="utf-8")

    detect_text = (
        "[Campus Library] — [left 20° to right 20°] — "
        "[Large brick library with arched windows] — [~20–50 m]\n"
    )
    grounds = {"Campus Library": [0.2, 0.1, 0.8, 0.9]}
    write_vlm(scene, detect_text, grounds, fixes={})
    write_photo(scene / "photo.png", seed=31002)

    manifest = {
        "name": "campus_300m",
        "center": {"lat": lat0, "lon": lon0},
        "radius_m": 300.0,
        "camera": {"heading_deg": heading, "fov_deg": 70.0, "fov_margin_deg": 15.0},
        "photo": "photo.png",
        "element_counts": counts,
    }
    (scene / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    truth = {"features": [{"name": "Campus Library", "osm_id": "way/5001"}]}
    (scene / "ground_truth.json").write_text(
        json.dumps(truth, indent=2) + "\n", encoding="utf-8"
    )


def main() -> None:
    make_harbour_walk()
    make_campus_300m()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
