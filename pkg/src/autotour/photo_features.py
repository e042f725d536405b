"""Photo landmark detection: the four-step detection prompt, structured
output parsing, category alignment, and the vision-model provider
interface with a deterministic file-backed mock.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .osm_ingest import FeatureCategory

logger = logging.getLogger(__name__)

CORE_OSM_KEYS = ("building", "road", "park", "natural", "waterway")

# single-value distance "~d m" widens to this band around d
DISTANCE_EXPANSION = (0.6, 1.4)

BBOX_MIN_MODIFICATION = 0.005


class PhotoFeatureError(Exception):
    pass


class NoParsableLines(PhotoFeatureError):
    pass


class ProviderError(PhotoFeatureError):
    pass


class GroundingRefused(PhotoFeatureError):
    pass


class UnknownScenario(PhotoFeatureError):
    pass


class EmptyScene(PhotoFeatureError):
    pass


@dataclass(frozen=True)
class PhotoFeature:
    """A landmark detected in the photo: name, signed photo-relative angle
    span (negative = left of heading), description, distance band, and
    aligned category.
    """

    name: str
    angle_span: tuple[float, float]
    description: str
    distance_range: tuple[float, float]
    category: FeatureCategory = FeatureCategory.OTHER

    def __post_init__(self) -> None:
        left, right = self.angle_span
        if not left < right:
            raise ValueError(f"angle span must satisfy left < right, got {self.angle_span}")
        if right - left >= 360.0:
            raise ValueError(f"angle span too wide: {self.angle_span}")
        d_min, d_max = self.distance_range
        if not 0.0 <= d_min < d_max:
            raise ValueError(f"invalid distance range {self.distance_range}")


@dataclass(frozen=True)
class BoundingBox:
    """Relative image coordinates in [0, 1]."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x_min < self.x_max <= 1.0 and 0.0 <= self.y_min < self.y_max <= 1.0):
            raise ValueError(f"invalid bounding box {self.as_list()}")

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    @classmethod
    def clamped(cls, coords) -> "BoundingBox":
        x0, y0, x1, y1 = (min(1.0, max(0.0, float(c))) for c in coords)
        return cls(x0, y0, x1, y1)


@dataclass(frozen=True)
class FixDecision:
    label: str
    modified: bool
    bounding_box: BoundingBox


class VlmProvider:
    """Interface for vision-model calls.  Implementations raise
    ProviderError on transport or model failure.
    """

    capabilities: frozenset[str] = frozenset({"detect", "ground", "fix", "describe"})

    def detect(self, photo: bytes, prompt: str) -> str:
        raise NotImplementedError

    def ground(self, photo: bytes, label: str) -> str:
        raise NotImplementedError

    def fix(self, photo: bytes, label: str, draft: BoundingBox) -> str:
        raise NotImplementedError

    def describe(self, prompt: str) -> str:
        raise NotImplementedError


def detection_prompt() -> str:
    """The four-step structured detection prompt."""
    return (
        "You are analyzing a street-level photograph.\n"
        "\n"
        "Step 1 - Category guidance: identify key features within four major\n"
        "categories: transportation infrastructure, natural features, built\n"
        "environment, and additional landmarks. Ignore long-tail objects such\n"
        "as lampposts, benches, flowers, or signage.\n"
        "\n"
        "Step 2 - Structured description: summarize each detected feature on\n"
        "its own line in the exact format:\n"
        "[feature name] -- [angle span] -- [description] -- [distance]\n"
        "Angle spans are relative to the camera heading, written like\n"
        "\"left 30° to right 10°\". Distances are meters, written like\n"
        "\"~20 m\" or \"~5–20 m\".\n"
        "\n"
        "Step 3 - Left-to-right ordering: sort all detected features by their\n"
        "left-to-right position in the image.\n"
        "\n"
        "Step 4 - Category alignment: retain only features aligned with the\n"
        "core OSM keys {building, road, park, natural, waterway}.\n"
    )


_ANGLE_TOKEN = re.compile(r"(left|right)\s*(\d+(?:\.\d+)?)\s*°?", re.IGNORECASE)
_ANGLE_FIELD = re.compile(
    r"(left|right)\s*\d+(?:\.\d+)?\s*°?\s*(?:to|-)\s*(left|right)\s*\d+(?:\.\d+)?",
    re.IGNORECASE,
)
_DIST_RANGE = re.compile(
    r"~?\s*(\d+(?:\.\d+)?)\s*[–—-]\s*(\d+(?:\.\d+)?)\s*m\b", re.IGNORECASE
)
_DIST_SINGLE = re.compile(r"~?\s*(\d+(?:\.\d+)?)\s*m\b", re.IGNORECASE)
_BRACKET = re.compile(r"\[([^\[\]]*)\]")

_CATEGORY_KEYWORDS: list[tuple[FeatureCategory, tuple[str, ...]]] = [
    (FeatureCategory.ROAD, ("bridge", "walkway", "road", "street", "highway", "path", "overpass")),
    (FeatureCategory.BUILDING, ("tower", "building", "block", "house", "skyscraper", "hall", "mall")),
    (FeatureCategory.WATERWAY, ("lake", "river", "canal", "pond", "harbour", "harbor")),
    (FeatureCategory.PARK, ("park", "garden", "playground", "lawn")),
    (FeatureCategory.NATURAL, ("tree", "hill", "mountain", "rock", "forest", "cliff")),
]


def infer_category(text: str) -> FeatureCategory:
    """Keyword-table mapping from free text onto the core categories.
    Matches whole words only ("mall" must not fire inside "small").
    """
    words = re.findall(r"[a-zà-ÿ]+", text.lower())
    for category, keywords in _CATEGORY_KEYWORDS:
        if any(w.startswith(k) for k in keywords for w in words):
            return category
    return FeatureCategory.OTHER


def _parse_angle_field(field: str) -> Optional[tuple[float, float]]:
    tokens = _ANGLE_TOKEN.findall(field)
    if len(tokens) != 2:
        return None
    values = [
        -float(mag) if side.lower() == "left" else float(mag) for side, mag in tokens
    ]
    left, right = values
    if not left < right:
        return None
    return left, right


def _parse_distance_field(field: str) -> Optional[tuple[float, float]]:
    m = _DIST_RANGE.search(field)
    if m:
        lo, hi = float(m.group(1)), float(m.group(2))
        if 0.0 <= lo < hi:
            return lo, hi
        return None
    m = _DIST_SINGLE.search(field)
    if m:
        d = float(m.group(1))
        if d > 0.0:
            return DISTANCE_EXPANSION[0] * d, DISTANCE_EXPANSION[1] * d
    return None


def parse_detection_line(line: str) -> Optional[PhotoFeature]:
    """Parse one bracket-quadruple line; None when unsalvageable."""
    fields = _BRACKET.findall(line)
    if len(fields) < 4:
        return None
    angle_span = None
    distance = None
    rest = []
    for f in fields:
        if angle_span is None and _ANGLE_FIELD.search(f):
            angle_span = _parse_angle_field(f)
            continue
        if distance is None and (_DIST_RANGE.search(f) or _DIST_SINGLE.search(f)):
            distance = _parse_distance_field(f)
            continue
        rest.append(f.strip())
    if angle_span is None or distance is None or len(rest) < 2:
        return None
    name, description = rest[0], rest[1]
    if not name:
        return None
    try:
        return PhotoFeature(
            name=name,
            angle_span=angle_span,
            description=description,
            distance_range=distance,
            category=infer_category(f"{name} {description}"),
        )
    except ValueError:
        return None


def parse_detection_output(text: str) -> list[PhotoFeature]:
    """Parse the model's multi-line detection output, salvaging well-formed
    lines and collecting rejects.  Raises NoParsableLines when nothing
    parses.
    """
    features: list[PhotoFeature] = []
    rejects: list[str] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        parsed = parse_detection_line(line)
        if parsed is not None:
            features.append(parsed)
        else:
            rejects.append(line)
    if rejects:
        logger.info("rejected %d unparsable detection lines", len(rejects))
    if not features:
        raise NoParsableLines(f"no parsable detection lines among {len(rejects)} candidates")
    return features


def render_detection_line(pf: PhotoFeature) -> str:
    """Canonical Step-2 quadruple rendering; inverse of the parser for
    well-formed features.
    """

    def angle(v: float) -> str:
        side = "left" if v < 0 else "right"
        mag = abs(v)
        return f"{side} {mag:g}°"

    left, right = pf.angle_span
    d_min, d_max = pf.distance_range
    return (
        f"[{pf.name}] -- [{angle(left)} to {angle(right)}] -- "
        f"[{pf.description}] -- [~{d_min:g}–{d_max:g} m]"
    )


def _looks_like_landmark_name(name: str) -> bool:
    # proper-noun heuristic: at least two capitalized words
    return sum(1 for w in name.split() if w[:1].isupper()) >= 2


def align_categories(features: list[PhotoFeature]) -> list[PhotoFeature]:
    """Keep features in the five core categories; uncategorized features
    survive only with a landmark-like proper name.
    """
    kept = []
    for pf in features:
        if pf.category is not FeatureCategory.OTHER:
            kept.append(pf)
        elif _looks_like_landmark_name(pf.name):
            kept.append(pf)
        else:
            logger.info("dropping uncategorized feature %r", pf.name)
    return kept


def detect(provider: VlmProvider, photo: bytes, camera=None) -> list[PhotoFeature]:
    """Run the detection prompt through a provider and parse the result."""
    response = provider.detect(photo, detection_prompt())
    if not response.strip():
        raise NoParsableLines("empty model response")
    return align_categories(parse_detection_output(response))


def ground(provider: VlmProvider, photo: bytes, feature_label: str) -> BoundingBox:
    """Ask the provider for the bounding box of a labeled feature."""
    response = provider.ground(photo, feature_label)
    try:
        payload = json.loads(response)
        coords = payload["bounding_box"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ProviderError(f"malformed grounding response: {response!r}") from exc
    return BoundingBox.clamped(coords)


def fix_bbox(provider: VlmProvider, photo: bytes, label: str, draft: BoundingBox) -> FixDecision:
    """Ask the provider to judge and possibly correct a draft bounding box."""
    response = provider.fix(photo, label, draft)
    try:
        payload = json.loads(response)
        modified = str(payload.get("modified", "no")).lower() == "yes"
        box = BoundingBox.clamped(payload["bounding_box"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ProviderError(f"malformed fix response: {response!r}") from exc
    if modified and all(
        abs(a - b) < BBOX_MIN_MODIFICATION for a, b in zip(box.as_list(), draft.as_list())
    ):
        # provider echoed the draft; normalize to an unmodified decision
        return FixDecision(label=label, modified=False, bounding_box=draft)
    if not modified:
        box = draft
    return FixDecision(label=label, modified=modified, bounding_box=box)


def describe_prompt(entries: list[dict]) -> str:
    lines = [
        "Compose a narrative-style explanation that functions as a virtual",
        "tour guide. Cover each of these features, their types, and their",
        "spatial relationships:",
    ]
    for e in entries:
        lines.append(json.dumps(e, sort_keys=True))
    return "\n".join(lines)


def describe(provider: VlmProvider, matches) -> str:
    """Scene-level tour-guide text covering every matched and unmatched
    feature.
    """
    if not matches:
        raise EmptyScene("nothing to describe")
    entries = []
    for m in matches:
        entries.append({
            "name": m.photo_feature.name,
            "category": m.photo_feature.category.value,
            "description": m.photo_feature.description,
            "matched_map_feature": m.matched.display_name if m.matched else None,
        })
    return provider.describe(describe_prompt(entries))


def input_digest(*parts: str) -> str:
    """Stable digest keying mock fixture files."""
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


class MockVlmProvider(VlmProvider):
    """Deterministic provider replaying canned responses from a scenario
    fixture directory (``vlm/<op>/<digest>.txt``).

    Digests: detect keys on the photo reference (falling back to
    ``default.txt``), ground and fix key on the feature label.  Tour text
    is synthesized from a fixed template so it always covers the scene.
    """

    def __init__(self, scenario: str, root: Path):
        self.scenario = scenario
        self.root = Path(root)
        self._cache: dict[tuple[str, str], str] = {}
        self._lock = threading.Lock()
        if not (self.root / "vlm").is_dir():
            raise UnknownScenario(f"no vlm fixtures for scenario {scenario!r} under {root}")

    def _load(self, op: str, digest: str, fallback: str | None = None) -> Optional[str]:
        with self._lock:
            key = (op, digest)
            if key in self._cache:
                return self._cache[key]
        path = self.root / "vlm" / op / f"{digest}.txt"
        if not path.is_file() and fallback is not None:
            path = self.root / "vlm" / op / fallback
        if not path.is_file():
            return None
        text = path.read_text(encoding="utf-8")
        with self._lock:
            self._cache[key] = text
        return text

    def detect(self, photo: bytes, prompt: str) -> str:
        digest = input_digest("detect", hashlib.sha256(photo).hexdigest())
        text = self._load("detect", digest, fallback="default.txt")
        if text is None:
            raise ProviderError(f"no canned detect response in scenario {self.scenario!r}")
        return text

    def ground(self, photo: bytes, label: str) -> str:
        text = self._load("ground", input_digest("ground", label))
        if text is None:
            raise GroundingRefused(f"mock cannot ground label {label!r}")
        return text

    def fix(self, photo: bytes, label: str, draft: BoundingBox) -> str:
        text = self._load("fix", input_digest("fix", label))
        if text is None:
            return json.dumps({
                "label": label, "modified": "no", "bounding_box": draft.as_list(),
            })
        return text

    def describe(self, prompt: str) -> str:
        entries = []
        for line in prompt.splitlines():
            line = line.strip()
            if line.startswith("{"):
                entries.append(json.loads(line))
        parts = ["Welcome! Here is what you are looking at, from left to right."]
        for e in entries:
            target = e.get("matched_map_feature")
            anchor = f" It corresponds to {target} on the map." if target else ""
            parts.append(
                f"{e['name']} ({e['category']}): {e['description']}.{anchor}"
            )
        return " ".join(parts)


def mock_provider(scenario: str, fixtures_root: Path) -> MockVlmProvider:
    """Provider replaying the named fixture scenario."""
    root = Path(fixtures_root) / scenario
    if not root.is_dir():
        raise UnknownScenario(f"unknown scenario {scenario!r} under {fixtures_root}")
    return MockVlmProvider(scenario, root)
