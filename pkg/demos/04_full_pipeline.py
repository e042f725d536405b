#!/usr/bin/env python3
"""The whole pipeline offline: map snapshot + canned vision-model
responses in, canonical annotated scene document out.
"""

import dataclasses
from pathlib import Path

from autotour import pipeline
from autotour.config import load_config
from autotour.presentation import serialize_result

config = dataclasses.replace(
    load_config(),
    mode="fixture",
    scenario="harbour_walk",
    fixtures_root=Path(__file__).resolve().parents[1] / "fixtures",
)

result = pipeline.run_fixture_scene(
    "harbour_walk", config,
    on_stage=lambda stage, ms: print(f"  {stage:<14} {ms:8.1f} ms"),
)
print()
print(serialize_result(result))
