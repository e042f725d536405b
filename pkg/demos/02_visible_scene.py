#!/usr/bin/env python3
"""From a stored map snapshot to the visible scene: parse the Overpass
document, unify nodes/ways/relations, project into the camera frame, and
apply the field-of-view and occlusion filters.
"""

from pathlib import Path

from autotour.geo_core import GeoPoint
from autotour.osm_ingest import (
    build_geo_features,
    embed_nodes_into_ways,
    fetch_elements,
    lift_relations_to_ways,
    parse_overpass,
)
from autotour.scene_filter import CameraPose, visible_scene

scene_dir = Path(__file__).resolve().parents[1] / "fixtures" / "harbour_walk"
doc = fetch_elements("", str(scene_dir / "overpass.json"), mode="fixture")
elements = embed_nodes_into_ways(lift_relations_to_ways(parse_overpass(doc)))

camera = CameraPose(position=GeoPoint(22.3364, 114.2655), heading=0.0)
features = build_geo_features(elements, camera)
print(f"features on the map:  {len(features)}")

scene = visible_scene(features, camera)
print(f"visible to the camera: {len(scene)} (left to right)\n")
for f in scene:
    iv = f.angular_interval
    print(f"  {f.display_name:<24} {f.category.value:<9} "
          f"{f.distance_m:6.1f} m  bearings {iv.start:6.1f}°..{iv.end:6.1f}°")
    if f.inclusive_info:
        print(f"      contains: {', '.join(f.inclusive_info)}")
    if f.nearby_info:
        print(f"      nearby:   {', '.join(f.nearby_info)}")
