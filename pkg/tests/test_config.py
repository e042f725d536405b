import json
from pathlib import Path

import pytest

from autotour.config import AppConfig, ConfigError, load_config


class TestDefaults:
    def test_sensible_defaults(self):
        cfg = load_config(env={})
        assert cfg.radius_m == 300.0
        assert cfg.match_threshold == 0.02
        assert cfg.fov_deg == 70.0
        assert cfg.fov_margin_deg == 15.0
        assert cfg.mode == "fixture"
        assert cfg.vlm_api_key is None


class TestFileOverrides:
    def test_dotted_keys(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({
            "match.threshold": 0.05,
            "overpass.radius_m": 150,
            "scenario": "harbour_walk",
            "fixtures_root": "/data/fixtures",
        }))
        cfg = load_config(path=path, env={})
        assert cfg.match_threshold == 0.05
        assert cfg.radius_m == 150
        assert cfg.scenario == "harbour_walk"
        assert cfg.fixtures_root == Path("/data/fixtures")

    def test_env_points_to_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"mode": "live"}))
        cfg = load_config(env={"AUTOTOUR_CONFIG": str(path)})
        assert cfg.mode == "live"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(path=tmp_path / "absent.json", env={})

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{broken")
        with pytest.raises(ConfigError):
            load_config(path=path, env={})


class TestSecrets:
    def test_key_from_environment_only(self, tmp_path):
        # a key placed in the config file must be ignored
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"vlm_api_key": "from-file"}))
        cfg = load_config(path=path, env={"AUTOTOUR_VLM_KEY": "from-env"})
        assert cfg.vlm_api_key == "from-env"
        cfg = load_config(path=path, env={})
        assert cfg.vlm_api_key is None

    def test_key_not_in_repr(self):
        cfg = load_config(env={"AUTOTOUR_VLM_KEY": "s3cr3t"})
        assert cfg.vlm_api_key == "s3cr3t"
        assert "s3cr3t" not in repr(cfg)


class TestFixtureDir:
    def test_join(self):
        cfg = AppConfig(fixtures_root=Path("fixtures"))
        assert cfg.fixture_dir("scene") == Path("fixtures/scene")
