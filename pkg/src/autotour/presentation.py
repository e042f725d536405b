"""Final result assembly: bounding-box fixes, crop ranges, annotation
records, and the canonical scene result document (schema_version 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .matcher import MatchResult
from .photo_features import BoundingBox, FixDecision, PhotoFeature
from .scene_filter import CameraPose

SCHEMA_VERSION = 1

DEFAULT_CROP_SHRINK = 0.1


class PresentationError(Exception):
    pass


class LabelMismatch(PresentationError):
    pass


class ArityMismatch(PresentationError):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    label: str
    bounding_box: Optional[BoundingBox]
    crop_range: Optional[BoundingBox]
    modified: bool
    matched_feature_id: Optional[str]
    r_norm: float
    description: str

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("annotation label must be non-empty")


@dataclass
class SceneResult:
    photo_id: str
    camera: CameraPose
    annotations: list[AnnotationRecord]
    tour_text: str
    unmatched: list[dict] = field(default_factory=list)
    timings_ms: dict[str, float] = field(default_factory=dict)


def merge_bbox_fix(draft_label: str, draft: BoundingBox, decision: FixDecision) -> BoundingBox:
    """Apply a fix decision to a draft box: the corrected box when the
    judge modified it, otherwise the draft unchanged.
    """
    if decision.label != draft_label:
        raise LabelMismatch(f"decision for {decision.label!r} applied to draft {draft_label!r}")
    return decision.bounding_box if decision.modified else draft


def compute_crop_range(bbox: BoundingBox, shrink: float = DEFAULT_CROP_SHRINK) -> BoundingBox:
    """Shrink a box symmetrically toward its center by ``shrink`` of each
    dimension; the crop always stays inside the box.
    """
    if not 0.0 <= shrink < 0.5:
        raise ValueError(f"shrink must be in [0, 0.5), got {shrink}")
    dx = (bbox.x_max - bbox.x_min) * shrink / 2.0
    dy = (bbox.y_max - bbox.y_min) * shrink / 2.0
    return BoundingBox(bbox.x_min + dx, bbox.y_min + dy, bbox.x_max - dx, bbox.y_max - dy)


def build_scene_result(photo_id: str, camera: CameraPose, matches: list[MatchResult],
                       annotations: list[AnnotationRecord], tour_text: str,
                       timings_ms: Optional[dict[str, float]] = None) -> SceneResult:
    """Aggregate everything into a serializable SceneResult.  There must be
    exactly one annotation per photo feature; unmatched features keep the
    detector's own description.
    """
    if len(matches) != len(annotations):
        raise ArityMismatch(f"{len(matches)} matches but {len(annotations)} annotations")
    unmatched = [
        {
            "name": m.photo_feature.name,
            "description": m.photo_feature.description,
            "category": m.photo_feature.category.value,
        }
        for m in matches
        if not m.is_matched
    ]
    return SceneResult(
        photo_id=photo_id,
        camera=camera,
        annotations=list(annotations),
        tour_text=tour_text,
        unmatched=unmatched,
        timings_ms=dict(timings_ms or {}),
    )


def _fmt_coord(v: float) -> str:
    return f"{v:.4f}"


def _fmt_bbox(box: Optional[BoundingBox]) -> str:
    if box is None:
        return "null"
    return "[" + ", ".join(_fmt_coord(c) for c in box.as_list()) + "]"


def serialize_result(result: SceneResult) -> str:
    """Canonical serialization: stable field order, relative coordinates as
    4-decimal fixed point, UTF-8 text.
    """
    j = json.dumps  # for strings and general values
    lines = []
    lines.append("{")
    lines.append(f'  "schema_version": {SCHEMA_VERSION},')
    lines.append(f'  "photo_id": {j(result.photo_id, ensure_ascii=False)},')
    cam = result.camera
    lines.append(
        '  "camera": {'
        f'"lat": {cam.position.lat!r}, "lon": {cam.position.lon!r}, '
        f'"heading_deg": {cam.heading!r}, "fov_deg": {cam.fov_deg!r}, '
        f'"fov_margin_deg": {cam.fov_margin_deg!r}'
        "},"
    )
    lines.append('  "annotations": [')
    for i, a in enumerate(result.annotations):
        comma = "," if i < len(result.annotations) - 1 else ""
        lines.append(
            "    {"
            f'"label": {j(a.label, ensure_ascii=False)}, '
            f'"bounding_box": {_fmt_bbox(a.bounding_box)}, '
            f'"crop_range": {_fmt_bbox(a.crop_range)}, '
            f'"modified": {j("yes" if a.modified else "no")}, '
            f'"matched_feature_id": {j(a.matched_feature_id)}, '
            f'"r_norm": {_fmt_coord(a.r_norm)}, '
            f'"description": {j(a.description, ensure_ascii=False)}'
            "}" + comma
        )
    lines.append("  ],")
    lines.append(f'  "tour_text": {j(result.tour_text, ensure_ascii=False)},')
    # timings stay in-memory (CLI printout, service progress events): the
    # canonical document must be byte-identical across repeated runs
    lines.append(f'  "unmatched": {j(result.unmatched, ensure_ascii=False)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_result(document: str) -> SceneResult:
    """Inverse of serialize_result."""
    payload = json.loads(document)
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise PresentationError(f"unsupported schema_version {payload.get('schema_version')}")
    from .geo_core import GeoPoint

    cam = payload["camera"]
    camera = CameraPose(
        position=GeoPoint(cam["lat"], cam["lon"]),
        heading=cam["heading_deg"],
        fov_deg=cam["fov_deg"],
        fov_margin_deg=cam["fov_margin_deg"],
    )
    annotations = []
    for raw in payload["annotations"]:
        annotations.append(AnnotationRecord(
            label=raw["label"],
            bounding_box=BoundingBox(*raw["bounding_box"]) if raw["bounding_box"] else None,
            crop_range=BoundingBox(*raw["crop_range"]) if raw["crop_range"] else None,
            modified=raw["modified"] == "yes",
            matched_feature_id=raw["matched_feature_id"],
            r_norm=float(raw["r_norm"]),
            description=raw["description"],
        ))
    return SceneResult(
        photo_id=payload["photo_id"],
        camera=camera,
        annotations=annotations,
        tour_text=payload["tour_text"],
        unmatched=payload["unmatched"],
    )
