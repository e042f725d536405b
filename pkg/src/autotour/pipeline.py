"""End-to-end photo analysis: the geo branch (Overpass, unification,
visibility filtering) and the detection branch run concurrently, join at
matching, then grounding, box fixing, and description produce the final
scene result.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional

from . import osm_ingest, photo_features, scene_filter
from .config import AppConfig
from .matcher import MatchResult, match_scene
from .osm_ingest import GeoFeature
from .photo_features import (
    BoundingBox,
    GroundingRefused,
    PhotoFeature,
    VlmProvider,
    mock_provider,
)
from .presentation import (
    AnnotationRecord,
    SceneResult,
    build_scene_result,
    compute_crop_range,
    merge_bbox_fix,
)
from .scene_filter import CameraPose

logger = logging.getLogger(__name__)

StageCallback = Callable[[str, float], None]


class PipelineError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class _StageClock:
    def __init__(self, on_stage: Optional[StageCallback] = None):
        self.timings_ms: dict[str, float] = {}
        self._on_stage = on_stage

    def run(self, stage: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
        except Exception as exc:
            raise PipelineError(stage, exc) from exc
        ms = (time.perf_counter() - t0) * 1000.0
        self.timings_ms[stage] = ms
        if self._on_stage is not None:
            self._on_stage(stage, ms)
        return result


def provider_for(config: AppConfig) -> VlmProvider:
    """Provider selected by config; only the deterministic mock ships with
    the library, live transports are injected by the caller.
    """
    if config.detect_provider == "mock":
        if not config.scenario:
            raise ValueError("mock provider requires a scenario")
        return mock_provider(config.scenario, config.fixtures_root)
    raise ValueError(f"unknown provider {config.detect_provider!r}")


def geo_branch(camera: CameraPose, config: AppConfig, clock: _StageClock,
               scene: Optional[str] = None) -> list[GeoFeature]:
    """Overpass fetch (or fixture replay), parsing, unification, and
    visibility filtering.
    """
    query = osm_ingest.build_overpass_query(camera.position, config.radius_m)
    if config.mode == "fixture":
        source = str(config.fixture_dir(scene or config.scenario or "") / "overpass.json")
        doc = clock.run("osm_fetch", osm_ingest.fetch_elements, query, source, "fixture")
    else:
        doc = clock.run(
            "osm_fetch", osm_ingest.fetch_elements, query, config.overpass_endpoint, "live"
        )
    elements = clock.run("osm_parse", osm_ingest.parse_overpass, doc)
    elements = clock.run("unify", lambda els: osm_ingest.embed_nodes_into_ways(
        osm_ingest.lift_relations_to_ways(els)), elements)
    features = clock.run("geo_features", osm_ingest.build_geo_features, elements, camera)
    return clock.run("scene_filter", scene_filter.visible_scene, features, camera)


def _annotate(provider: VlmProvider, photo: bytes, matches: list[MatchResult],
              crop_shrink: float) -> list[AnnotationRecord]:
    def one(m: MatchResult) -> AnnotationRecord:
        label = m.photo_feature.name
        bbox: Optional[BoundingBox] = None
        crop: Optional[BoundingBox] = None
        modified = False
        try:
            draft = photo_features.ground(provider, photo, label)
            decision = photo_features.fix_bbox(provider, photo, label, draft)
            bbox = merge_bbox_fix(label, draft, decision)
            modified = decision.modified
            crop = compute_crop_range(bbox, crop_shrink)
        except GroundingRefused:
            logger.info("grounding refused for %r; annotation kept without a box", label)
        return AnnotationRecord(
            label=label,
            bounding_box=bbox,
            crop_range=crop,
            modified=modified,
            matched_feature_id=m.matched.id if m.matched else None,
            r_norm=m.r_norm,
            description=m.photo_feature.description,
        )

    # grounding and fixing run in parallel per feature; output order
    # follows input order regardless of completion order
    if len(matches) <= 1:
        return [one(m) for m in matches]
    with ThreadPoolExecutor(max_workers=min(8, len(matches))) as pool:
        return list(pool.map(one, matches))


def analyze(photo: bytes, camera: CameraPose, config: AppConfig,
            provider: Optional[VlmProvider] = None, scene: Optional[str] = None,
            on_stage: Optional[StageCallback] = None) -> SceneResult:
    """Run the full pipeline over one photo and return the scene result."""
    provider = provider or provider_for(config)
    clock = _StageClock(on_stage)

    with ThreadPoolExecutor(max_workers=2) as pool:
        geo_future = pool.submit(geo_branch, camera, config, clock, scene)
        detect_future = pool.submit(
            clock.run, "vlm_detect", photo_features.detect, provider, photo, camera
        )
        pfs: list[PhotoFeature] = detect_future.result()
        gfs: list[GeoFeature] = geo_future.result()

    matches = clock.run("matching", match_scene, pfs, gfs, camera, config.match_threshold)
    annotations = clock.run(
        "grounding", _annotate, provider, photo, matches, config.crop_shrink
    )
    tour_text = clock.run("describe", photo_features.describe, provider, matches) if matches else ""
    return clock.run(
        "assemble",
        build_scene_result,
        scene or "photo",
        camera,
        matches,
        annotations,
        tour_text,
        clock.timings_ms,
    )


def camera_from_manifest(manifest: dict, config: AppConfig) -> CameraPose:
    from .geo_core import GeoPoint

    cam = manifest["camera"]
    return CameraPose(
        position=GeoPoint(manifest["center"]["lat"], manifest["center"]["lon"]),
        heading=float(cam["heading_deg"]),
        fov_deg=float(cam.get("fov_deg", config.fov_deg)),
        fov_margin_deg=float(cam.get("fov_margin_deg", config.fov_margin_deg)),
    )


def load_manifest(scene_dir: Path) -> dict:
    return json.loads((Path(scene_dir) / "manifest.json").read_text(encoding="utf-8"))


def run_fixture_scene(scene: str, config: AppConfig,
                      on_stage: Optional[StageCallback] = None) -> SceneResult:
    """Analyze a stored fixture scene offline with the mock provider."""
    scene_dir = config.fixture_dir(scene)
    manifest = load_manifest(scene_dir)
    camera = camera_from_manifest(manifest, config)
    photo_path = scene_dir / manifest.get("photo", "photo.png")
    photo = photo_path.read_bytes() if photo_path.is_file() else b""
    provider = mock_provider(scene, config.fixtures_root)
    return analyze(photo, camera, config, provider=provider, scene=scene, on_stage=on_stage)
