import json
import socket
from pathlib import Path

import pytest
from click.testing import CliRunner

from autotour.cli import main

FIXTURES = Path("fixtures").resolve()


@pytest.fixture()
def runner():
    return CliRunner()


class TestRun:
    def test_fixture_scene(self, runner, tmp_path):
        out = tmp_path / "result.json"
        result = runner.invoke(main, [
            "run", "--mode", "fixture", "--scenario", "harbour_walk", "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["schema_version"] == 1
        assert len(payload["annotations"]) == 3
        assert "stage timings:" in result.output
        assert "matching" in result.output

    def test_stdout_when_no_out(self, runner):
        result = runner.invoke(main, [
            "run", "--mode", "fixture", "--scenario", "harbour_walk"])
        assert result.exit_code == 0
        assert '"schema_version": 1' in result.output

    def test_missing_photo_is_config_error(self, runner):
        result = runner.invoke(main, [
            "run", "--mode", "fixture", "--scenario", "harbour_walk",
            "--photo", "/no/such/photo.png"])
        assert result.exit_code == 2

    def test_unknown_scene_is_config_error(self, runner):
        result = runner.invoke(main, ["run", "--mode", "fixture", "--scenario", "ghost"])
        assert result.exit_code == 2

    def test_fixture_mode_without_scenario(self, runner):
        result = runner.invoke(main, ["run", "--mode", "fixture"])
        assert result.exit_code == 2

    def test_live_mode_requires_camera_args(self, runner, tmp_path):
        photo = tmp_path / "p.png"
        photo.write_bytes(b"x")
        result = runner.invoke(main, ["run", "--mode", "live", "--photo", str(photo)])
        assert result.exit_code == 2

    def test_two_runs_byte_identical(self, runner, tmp_path):
        outputs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            result = runner.invoke(main, [
                "run", "--mode", "fixture", "--scenario", "harbour_walk",
                "--out", str(out)])
            assert result.exit_code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_fixture_run_makes_no_network_calls(self, runner, tmp_path, monkeypatch):
        def refuse(*args, **kwargs):
            raise AssertionError("network access attempted during fixture run")

        monkeypatch.setattr(socket.socket, "connect", refuse)
        monkeypatch.setattr(socket, "create_connection", refuse)
        out = tmp_path / "r.json"
        result = runner.invoke(main, [
            "run", "--mode", "fixture", "--scenario", "harbour_walk", "--out", str(out)])
        assert result.exit_code == 0, result.output


class TestEvaluate:
    def test_fixture_suite(self, runner, tmp_path):
        out = tmp_path / "summary.json"
        result = runner.invoke(main, [
            "evaluate", "--scenes", str(FIXTURES / "*"), "--out", str(out)])
        assert result.exit_code == 0, result.output
        summary = json.loads(out.read_text())
        assert summary["aggregate"]["IR"] == 1.0
        assert summary["aggregate"]["MP"] == 1.0
        assert "harbour_walk" in summary["scenes"]

    def test_scene_without_ground_truth_skipped(self, runner, tmp_path):
        import shutil

        suite = tmp_path / "suite"
        shutil.copytree(FIXTURES / "harbour_walk", suite / "harbour_walk")
        shutil.copytree(FIXTURES / "campus_300m", suite / "bare_scene")
        (suite / "bare_scene" / "ground_truth.json").unlink()
        result = runner.invoke(main, ["evaluate", "--scenes", str(suite / "*")])
        assert result.exit_code == 0, result.output
        assert "skipped (no ground truth): bare_scene" in result.output

    def test_no_matching_scenes(self, runner, tmp_path):
        result = runner.invoke(main, ["evaluate", "--scenes", str(tmp_path / "none*")])
        assert result.exit_code == 2


class TestFixtureCapture:
    def test_duplicate_name_refused(self, runner, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "fixtures" / "taken").mkdir(parents=True)
        result = runner.invoke(main, [
            "fixture", "capture", "--lat", "22.3", "--lon", "114.2",
            "--name", "taken"])
        assert result.exit_code == 2
        assert "exists" in result.output

    def test_bad_radius_is_config_error(self, runner, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        result = runner.invoke(main, [
            "fixture", "capture", "--lat", "22.3", "--lon", "114.2",
            "--radius", "5", "--name", "tiny"])
        assert result.exit_code == 2

    def test_capture_writes_manifest_counts(self, runner, tmp_path, monkeypatch):
        doc = (FIXTURES / "harbour_walk" / "overpass.json").read_text()

        class FakeResponse:
            status_code = 200
            text = doc

        class FakeSession:
            def post(self, *args, **kwargs):
                return FakeResponse()

        import autotour.osm_ingest as osm_ingest

        monkeypatch.chdir(tmp_path)
        monkeypatch.setattr(osm_ingest.requests, "Session", FakeSession)
        result = runner.invoke(main, [
            "fixture", "capture", "--lat", "22.3364", "--lon", "114.2655",
            "--name", "captured"])
        assert result.exit_code == 0, result.output
        manifest = json.loads(
            (tmp_path / "fixtures" / "captured" / "manifest.json").read_text())
        source = json.loads((FIXTURES / "harbour_walk" / "manifest.json").read_text())
        assert manifest["element_counts"] == source["element_counts"]
        stored = (tmp_path / "fixtures" / "captured" / "overpass.json").read_text()
        assert stored == doc
