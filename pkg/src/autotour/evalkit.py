"""Evaluation metrics: weighted user-study scores, recall/precision of
identification and matching, and distance/density bucketing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

DEFAULT_WEIGHTS = (0.3, 0.3, 0.2, 0.2)

DISTANCE_BUCKETS = ((0.0, 10.0), (10.0, 30.0), (30.0, 50.0), (50.0, float("inf")))
DISTANCE_BUCKET_LABELS = ("<10m", "10-30m", "30-50m", ">50m")

NAME_TOKEN_OVERLAP_THRESHOLD = 0.5


class EvalError(Exception):
    pass


class ZeroDenominator(EvalError):
    def __init__(self, metric: str):
        super().__init__(f"denominator of {metric} is zero")
        self.metric = metric


@dataclass(frozen=True)
class MetricWeights:
    alpha: float = DEFAULT_WEIGHTS[0]
    beta: float = DEFAULT_WEIGHTS[1]
    gamma: float = DEFAULT_WEIGHTS[2]
    delta: float = DEFAULT_WEIGHTS[3]

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma, self.delta) < 0.0:
            raise ValueError("weights must be non-negative")
        total = self.alpha + self.beta + self.gamma + self.delta
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total}")


@dataclass(frozen=True)
class RatingSet:
    """Mean 1-4 ratings: completeness, matching, bounding box, description."""

    completeness: float
    matching: float
    bbox: float
    description: float

    def __post_init__(self) -> None:
        for v in (self.completeness, self.matching, self.bbox, self.description):
            if not 1.0 <= v <= 4.0:
                raise ValueError(f"rating {v} outside [1, 4]")


@dataclass(frozen=True)
class SystemCounts:
    n_correct_identified: int = 0
    n_ground_truth: int = 0
    n_total_identified: int = 0
    n_correct_matches: int = 0
    n_total_matches: int = 0

    def __post_init__(self) -> None:
        for v in (self.n_correct_identified, self.n_ground_truth, self.n_total_identified,
                  self.n_correct_matches, self.n_total_matches):
            if v < 0:
                raise ValueError("counts must be non-negative")
        if self.n_correct_identified > self.n_total_identified:
            raise ValueError("correct identified exceeds total identified")
        if self.n_correct_matches > self.n_total_matches:
            raise ValueError("correct matches exceeds total matches")

    def __add__(self, other: "SystemCounts") -> "SystemCounts":
        return SystemCounts(
            self.n_correct_identified + other.n_correct_identified,
            self.n_ground_truth + other.n_ground_truth,
            self.n_total_identified + other.n_total_identified,
            self.n_correct_matches + other.n_correct_matches,
            self.n_total_matches + other.n_total_matches,
        )


def weighted_score(r: RatingSet, w: MetricWeights = MetricWeights()) -> float:
    """Overall score as the weighted average of the four ratings."""
    return (
        w.alpha * r.completeness + w.beta * r.matching + w.gamma * r.bbox + w.delta * r.description
    )


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def system_metrics(c: SystemCounts) -> dict[str, float]:
    """Identification/matching recall and precision plus harmonic F1s."""
    if c.n_ground_truth == 0:
        raise ZeroDenominator("IR")
    if c.n_total_identified == 0:
        raise ZeroDenominator("IP")
    if c.n_total_matches == 0:
        raise ZeroDenominator("MP")
    ir = c.n_correct_identified / c.n_ground_truth
    ip = c.n_correct_identified / c.n_total_identified
    mr = c.n_correct_matches / c.n_ground_truth
    mp = c.n_correct_matches / c.n_total_matches
    return {
        "IR": ir, "IP": ip, "MR": mr, "MP": mp,
        "F1_id": _f1(ip, ir), "F1_match": _f1(mp, mr),
    }


def f1_from_pr(precision: float, recall: float) -> float:
    return _f1(precision, recall)


def _mean_ratings(samples: list[RatingSet]) -> RatingSet:
    n = len(samples)
    return RatingSet(
        sum(s.completeness for s in samples) / n,
        sum(s.matching for s in samples) / n,
        sum(s.bbox for s in samples) / n,
        sum(s.description for s in samples) / n,
    )


def bucket_scores(samples: Iterable[tuple[float, RatingSet]],
                  buckets=DISTANCE_BUCKETS,
                  labels=DISTANCE_BUCKET_LABELS) -> dict[str, RatingSet]:
    """Mean ratings per bucket keyed by label; empty buckets are absent."""
    samples = list(samples)
    if not samples:
        raise ValueError("samples must be non-empty")
    grouped: dict[str, list[RatingSet]] = {}
    for value, rating in samples:
        for (lo, hi), label in zip(buckets, labels):
            if lo <= value < hi:
                grouped.setdefault(label, []).append(rating)
                break
    return {label: _mean_ratings(rs) for label, rs in grouped.items()}


def density_bucket_scores(samples: Iterable[tuple[int, RatingSet]]) -> dict[str, RatingSet]:
    """Mean ratings per feature-density level (1..5 features per photo)."""
    buckets = tuple((float(k), float(k + 1)) for k in range(1, 6))
    labels = tuple(str(k) for k in range(1, 6))
    return bucket_scores(((float(d), r) for d, r in samples), buckets, labels)


_TOKEN = re.compile(r"[a-z0-9]+")


def _name_tokens(name: str) -> set[str]:
    return set(_TOKEN.findall(name.lower()))


def names_match(predicted: str, truth: str) -> bool:
    """Case-insensitive token-overlap identification criterion."""
    p, t = _name_tokens(predicted), _name_tokens(truth)
    if not p or not t:
        return False
    return len(p & t) / min(len(p), len(t)) >= NAME_TOKEN_OVERLAP_THRESHOLD


def score_scene(predicted, truth: dict) -> SystemCounts:
    """Count identification and matching hits of a SceneResult against a
    ground-truth record ({"features": [{"name": ..., "osm_id": ...}]}).

    Identification matches by name-token overlap; matching by OSM id
    equality.
    """
    truth_features = truth.get("features", [])
    predictions = [
        (a.label, a.matched_feature_id) for a in predicted.annotations
    ]
    used: set[int] = set()
    n_correct_id = 0
    n_correct_match = 0
    n_total_matches = 0
    for label, matched_id in predictions:
        if matched_id is not None:
            n_total_matches += 1
        hit: Optional[int] = None
        for i, tf in enumerate(truth_features):
            if i in used:
                continue
            if names_match(label, tf["name"]):
                hit = i
                break
        if hit is None:
            continue
        used.add(hit)
        n_correct_id += 1
        if matched_id is not None and matched_id == truth_features[hit].get("osm_id"):
            n_correct_match += 1
    return SystemCounts(
        n_correct_identified=n_correct_id,
        n_ground_truth=len(truth_features),
        n_total_identified=len(predictions),
        n_correct_matches=n_correct_match,
        n_total_matches=n_total_matches,
    )
