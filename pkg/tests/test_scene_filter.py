import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autotour.geo_core import (
    AngularInterval,
    GeoPoint,
    LocalPoint,
    Polygon,
    angular_extent,
)
from autotour.osm_ingest import FeatureCategory, GeoFeature
from autotour.scene_filter import (
    CameraPose,
    fov_filter,
    occlusion_filter,
    relative_bearing,
    sort_left_to_right,
    summarize_nearby,
    visible_scene,
)

CENTER = GeoPoint(22.3364, 114.2655)


def feature_at(bearing_deg, dist, half=5.0, category=FeatureCategory.BUILDING,
               name=None, fid=None):
    """Square footprint centred `dist` metres out along `bearing_deg`."""
    b = math.radians(bearing_deg)
    cx, cy = dist * math.sin(b), dist * math.cos(b)
    poly = Polygon([
        LocalPoint(cx - half, cy - half), LocalPoint(cx + half, cy - half),
        LocalPoint(cx + half, cy + half), LocalPoint(cx - half, cy + half),
    ])
    origin = LocalPoint(0.0, 0.0)
    fid = fid or f"way/{int(bearing_deg)}_{int(dist)}"
    return GeoFeature(
        id=fid, geo_points=[], closed=True, name=name, category=category,
        local_polygon=poly, distance_m=dist - half * math.sqrt(2),
        angular_interval=angular_extent(origin, poly),
    )


def camera(heading=0.0, fov=70.0, margin=15.0):
    return CameraPose(position=CENTER, heading=heading, fov_deg=fov, fov_margin_deg=margin)


class TestCameraPose:
    def test_view_interval_width(self):
        cam = camera(heading=0.0)
        view = cam.view_interval()
        assert view.span == pytest.approx(100.0)
        assert view.contains(0.0) and view.contains(310.1) and view.contains(49.9)
        assert not view.contains(180.0)

    @pytest.mark.parametrize("heading", [-1.0, 360.0, 720.0])
    def test_heading_validated(self, heading):
        with pytest.raises(ValueError):
            camera(heading=heading)

    @pytest.mark.parametrize("fov", [10.0, 150.0])
    def test_fov_validated(self, fov):
        with pytest.raises(ValueError):
            camera(fov=fov)


class TestFovFilter:
    def test_ahead_kept_behind_dropped(self):
        ahead = feature_at(0.0, 30.0)
        behind = feature_at(180.0, 30.0)
        assert fov_filter([ahead, behind], camera()) == [ahead]

    def test_partial_overlap_at_edge_kept(self):
        edge = feature_at(55.0, 50.0)  # interval dips below the +50° cone edge
        assert fov_filter([edge], camera()) == [edge]

    def test_contractive_and_idempotent(self):
        feats = [feature_at(b, 40.0) for b in range(0, 360, 20)]
        cam = camera(heading=90.0)
        once = fov_filter(feats, cam)
        assert set(f.id for f in once) <= set(f.id for f in feats)
        assert fov_filter(once, cam) == once


class TestOcclusionFilter:
    def test_building_hidden_behind_building_dropped(self):
        front = feature_at(0.0, 20.0, half=8.0, fid="way/front")
        back = feature_at(0.0, 60.0, half=4.0, fid="way/back")
        kept = occlusion_filter([front, back], camera())
        assert [f.id for f in kept] == ["way/front"]

    def test_partially_visible_building_kept(self):
        front = feature_at(-20.0, 20.0, half=6.0, fid="way/front")
        back = feature_at(10.0, 60.0, half=12.0, fid="way/back")
        kept = occlusion_filter([front, back], camera())
        assert {f.id for f in kept} == {"way/front", "way/back"}

    def test_roads_never_occluded(self):
        front = feature_at(0.0, 20.0, half=8.0, fid="way/front")
        road = feature_at(0.0, 60.0, half=4.0, category=FeatureCategory.ROAD,
                          fid="way/road")
        kept = occlusion_filter([front, road], camera())
        assert {f.id for f in kept} == {"way/front", "way/road"}

    def test_only_buildings_occlude(self):
        park = feature_at(0.0, 20.0, half=8.0, category=FeatureCategory.PARK,
                          name="Green", fid="way/park")
        back = feature_at(0.0, 60.0, half=4.0, fid="way/back")
        kept = occlusion_filter([park, back], camera())
        assert {f.id for f in kept} == {"way/park", "way/back"}

    def test_close_depths_do_not_occlude(self):
        # less than the 2 m depth separation: both kept
        a = feature_at(0.0, 30.0, half=5.0, fid="way/a")
        b = feature_at(0.0, 31.0, half=5.0, fid="way/b")
        assert len(occlusion_filter([a, b], camera())) == 2

    def test_idempotent(self):
        feats = [feature_at(b, d, fid=f"way/{b}_{d}")
                 for b, d in [(0, 20), (0, 60), (30, 40), (200, 30)]]
        once = occlusion_filter(feats, camera())
        assert occlusion_filter(once, camera()) == once


class TestOrdering:
    def test_left_to_right(self):
        left = feature_at(-40.0, 30.0, fid="way/l")
        mid = feature_at(0.0, 30.0, fid="way/m")
        right = feature_at(40.0, 30.0, fid="way/r")
        ordered = sort_left_to_right([right, left, mid], camera())
        assert [f.id for f in ordered] == ["way/l", "way/m", "way/r"]

    def test_respects_heading(self):
        cam = camera(heading=270.0)
        a = feature_at(250.0, 30.0, fid="way/a")  # 20° left of heading
        b = feature_at(280.0, 30.0, fid="way/b")  # 10° right
        assert [f.id for f in sort_left_to_right([b, a], cam)] == ["way/a", "way/b"]

    def test_relative_bearing_sign(self):
        cam = camera(heading=90.0)
        assert relative_bearing(feature_at(60.0, 30.0), cam) < 0
        assert relative_bearing(feature_at(120.0, 30.0), cam) > 0


class TestNearby:
    def test_neighbors_and_close_features(self):
        a = feature_at(-40.0, 30.0, name="A", fid="way/a")
        b = feature_at(0.0, 30.0, name="B", fid="way/b")
        c = feature_at(40.0, 30.0, name="C", fid="way/c")
        summarize_nearby([a, b, c])
        assert a.nearby_info == ["B"]
        assert set(b.nearby_info) == {"A", "C"}
        assert c.nearby_info == ["B"]

    def test_close_non_neighbor_included(self):
        a = feature_at(-40.0, 30.0, name="A", fid="way/a")
        b = feature_at(0.0, 30.0, name="B", fid="way/b")
        # far in sort order from a but physically adjacent to it
        d = feature_at(-40.0, 42.0, name="D", fid="way/d")
        summarize_nearby([a, b, d])
        assert "D" in a.nearby_info


class TestVisibleScene:
    def _scene(self):
        return [
            feature_at(-30.0, 25.0, name="West Tower", fid="way/1"),
            feature_at(20.0, 30.0, name="East Tower", fid="way/2"),
            feature_at(20.0, 80.0, half=4.0, name="Hidden", fid="way/3"),
            feature_at(180.0, 30.0, name="Behind", fid="way/4"),
        ]

    def test_chain_filters_and_orders(self):
        out = visible_scene(self._scene(), camera())
        assert [f.id for f in out] == ["way/1", "way/2"]
        assert out[0].nearby_info == ["East Tower"]

    def test_contractive_idempotent(self):
        cam = camera()
        once = visible_scene(self._scene(), cam)
        assert visible_scene(list(once), cam) == once

    @settings(max_examples=40, deadline=None)
    @given(heading=st.floats(min_value=0.0, max_value=359.9),
           bearings=st.lists(st.floats(min_value=0.0, max_value=359.9),
                             min_size=1, max_size=8))
    def test_output_always_sorted(self, heading, bearings):
        cam = camera(heading=heading)
        feats = [feature_at(b, 40.0, fid=f"way/{i}") for i, b in enumerate(bearings)]
        out = visible_scene(feats, cam)
        rels = [relative_bearing(f, cam) for f in out]
        assert rels == sorted(rels)
