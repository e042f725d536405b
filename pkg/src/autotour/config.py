"""Runtime configuration: file-based settings with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .matcher import DEFAULT_MATCH_THRESHOLD
from .osm_ingest import DEFAULT_OVERPASS_ENDPOINT, DEFAULT_RADIUS_M
from .scene_filter import DEFAULT_FOV_DEG, DEFAULT_FOV_MARGIN_DEG

CONFIG_ENV = "AUTOTOUR_CONFIG"
VLM_KEY_ENV = "AUTOTOUR_VLM_KEY"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AppConfig:
    overpass_endpoint: str = DEFAULT_OVERPASS_ENDPOINT
    radius_m: float = DEFAULT_RADIUS_M
    match_threshold: float = DEFAULT_MATCH_THRESHOLD
    fov_deg: float = DEFAULT_FOV_DEG
    fov_margin_deg: float = DEFAULT_FOV_MARGIN_DEG
    crop_shrink: float = 0.1
    mode: str = "fixture"  # live | fixture
    scenario: Optional[str] = None
    fixtures_root: Path = field(default_factory=lambda: Path("fixtures"))
    detect_provider: str = "mock"
    ground_provider: str = "mock"
    max_concurrent_jobs: int = 4
    job_ttl_s: float = 3600.0
    max_photo_bytes: int = 15 * 1024 * 1024
    # API key is read from the environment, never from config files,
    # and must never be logged (kept out of repr for that reason)
    vlm_api_key: Optional[str] = field(default=None, repr=False)

    def fixture_dir(self, scene: str) -> Path:
        return Path(self.fixtures_root) / scene


_FILE_KEYS = {
    "overpass.endpoint": "overpass_endpoint",
    "overpass.radius_m": "radius_m",
    "match.threshold": "match_threshold",
    "camera.fov_deg": "fov_deg",
    "camera.fov_margin_deg": "fov_margin_deg",
    "presentation.crop_shrink": "crop_shrink",
    "mode": "mode",
    "scenario": "scenario",
    "fixtures_root": "fixtures_root",
    "vlm.detect.provider": "detect_provider",
    "vlm.ground.provider": "ground_provider",
    "service.max_concurrent_jobs": "max_concurrent_jobs",
    "service.job_ttl_s": "job_ttl_s",
    "service.max_photo_bytes": "max_photo_bytes",
}


def load_config(path: Optional[Path] = None, env: Optional[dict] = None) -> AppConfig:
    """Defaults, overlaid by a JSON config file (explicit path or the
    AUTOTOUR_CONFIG env var), then by environment variables.
    """
    env = dict(os.environ if env is None else env)
    cfg = AppConfig()

    file_path = path or (Path(env[CONFIG_ENV]) if env.get(CONFIG_ENV) else None)
    if file_path is not None:
        try:
            raw = json.loads(Path(file_path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {file_path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config file {file_path}: {exc}") from exc
        updates = {}
        for key, attr in _FILE_KEYS.items():
            if key in raw:
                value = raw[key]
                if attr == "fixtures_root":
                    value = Path(value)
                updates[attr] = value
        cfg = replace(cfg, **updates)

    if env.get(VLM_KEY_ENV):
        cfg = replace(cfg, vlm_api_key=env[VLM_KEY_ENV])
    return cfg
