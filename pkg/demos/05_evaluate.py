#!/usr/bin/env python3
"""Score pipeline output against per-scene ground truth: identification
and matching recall/precision plus the weighted rating aggregate.
"""

import dataclasses
import json
from pathlib import Path

from autotour import pipeline
from autotour.config import load_config
from autotour.evalkit import (
    RatingSet,
    SystemCounts,
    score_scene,
    system_metrics,
    weighted_score,
)

fixtures = Path(__file__).resolve().parents[1] / "fixtures"
base = dataclasses.replace(load_config(), mode="fixture", fixtures_root=fixtures)

total = SystemCounts()
for scene_dir in sorted(fixtures.iterdir()):
    truth_path = scene_dir / "ground_truth.json"
    if not truth_path.is_file():
        continue
    config = dataclasses.replace(base, scenario=scene_dir.name)
    result = pipeline.run_fixture_scene(scene_dir.name, config)
    counts = score_scene(result, json.loads(truth_path.read_text()))
    total = total + counts
    print(f"{scene_dir.name:<16} {system_metrics(counts)}")

print(f"\naggregate: {system_metrics(total)}")

# the rating side: four 1-4 mean ratings collapse into one score
ratings = RatingSet(completeness=3.9, matching=3.8, bbox=3.5, description=3.7)
print(f"weighted rating score: {weighted_score(ratings):.3f}")
