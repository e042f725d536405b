#!/usr/bin/env python3
"""Parse a structured detection transcript and match each photo feature
against the visible map scene by sector overlap.
"""

from pathlib import Path

from autotour.geo_core import GeoPoint
from autotour.matcher import match_scene
from autotour.osm_ingest import (
    build_geo_features,
    embed_nodes_into_ways,
    fetch_elements,
    lift_relations_to_ways,
    parse_overpass,
)
from autotour.photo_features import parse_detection_output
from autotour.scene_filter import CameraPose, visible_scene

TRANSCRIPT = """\
[left 70° to left 30°] — [Multi-storey building (left)] — [White building with balconies] — [~20 m]
[left 10° to right 10°] — [Elevated walkway] — [Pedestrian bridge with a roof] — [~5–20 m]
[right 30° to right 70°] — [Multi-storey building (right)] — [Tall building with red/white façade] — [~30 m]
"""

photo_features = parse_detection_output(TRANSCRIPT)
for pf in photo_features:
    print(f"parsed: {pf.name!r:<36} span {pf.angle_span}  "
          f"distance {pf.distance_range}  category {pf.category.value}")

scene_dir = Path(__file__).resolve().parents[1] / "fixtures" / "harbour_walk"
doc = fetch_elements("", str(scene_dir / "overpass.json"), mode="fixture")
camera = CameraPose(position=GeoPoint(22.3364, 114.2655), heading=0.0)
scene = visible_scene(
    build_geo_features(embed_nodes_into_ways(lift_relations_to_ways(parse_overpass(doc))),
                       camera),
    camera,
)

print()
for m in match_scene(photo_features, scene, camera):
    target = m.matched.display_name if m.matched else "(unmatched)"
    print(f"{m.photo_feature.name:<32} -> {target:<22} r_norm={m.r_norm:.3f}")
