import dataclasses
import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from autotour import photo_features
from autotour.config import load_config
from autotour.service import HEALTH_CACHE_S, create_app

META = json.dumps({"lat": 22.3364, "lon": 114.2655, "heading_deg": 0.0})


@pytest.fixture(scope="module")
def client():
    cfg = dataclasses.replace(
        load_config(), mode="fixture", scenario="harbour_walk",
        fixtures_root=Path("fixtures"),
    )
    with TestClient(create_app(cfg)) as c:
        yield c


def submit(client, photo=b"photo-bytes", meta=META):
    return client.post(
        "/v1/jobs", files={"photo": ("p.png", photo, "image/png")}, data={"meta": meta},
    )


def wait_done(client, job_id, timeout_s=15.0):
    deadline = time.time() + timeout_s
    while time.time() < deadline:
        status = client.get(f"/v1/jobs/{job_id}/status").json()
        if status["state"] in ("done", "failed"):
            return status
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish: {status}")


class TestSubmit:
    def test_valid_submission_accepted(self, client):
        resp = submit(client)
        assert resp.status_code == 202
        assert "job_id" in resp.json()

    def test_invalid_heading_rejected(self, client):
        meta = json.dumps({"lat": 22.0, "lon": 114.0, "heading_deg": 720.0})
        resp = submit(client, meta=meta)
        assert resp.status_code == 422
        assert resp.json()["error_code"] == "invalid_metadata"

    def test_missing_fields_rejected(self, client):
        resp = submit(client, meta=json.dumps({"lat": 22.0}))
        assert resp.status_code == 422

    def test_oversized_photo_rejected(self, client):
        resp = submit(client, photo=b"x" * (16 * 1024 * 1024))
        assert resp.status_code == 413
        assert resp.json()["error_code"] == "payload_too_large"

    def test_empty_photo_rejected(self, client):
        resp = submit(client, photo=b"")
        assert resp.status_code == 422


class TestLifecycle:
    def test_full_lifecycle(self, client):
        job_id = submit(client).json()["job_id"]
        status = wait_done(client, job_id)
        assert status["state"] == "done"
        stages = [e["stage"] for e in status["progress"]]
        for stage in ("osm_fetch", "osm_parse", "vlm_detect", "matching",
                      "grounding", "describe", "assemble"):
            assert stage in stages
        times = [e["t"] for e in status["progress"]]
        assert times == sorted(times)

        result = client.get(f"/v1/jobs/{job_id}/result")
        assert result.status_code == 200
        payload = json.loads(result.text)
        assert payload["schema_version"] == 1
        assert len(payload["annotations"]) == 3

    def test_unknown_job(self, client):
        assert client.get("/v1/jobs/deadbeef/status").status_code == 404
        assert client.get("/v1/jobs/deadbeef/result").status_code == 404

    def test_result_before_done_conflicts(self, client):
        # a queued/running job must answer 409, not a partial document
        job_id = submit(client).json()["job_id"]
        resp = client.get(f"/v1/jobs/{job_id}/result")
        assert resp.status_code in (200, 409)
        if resp.status_code == 409:
            assert resp.json()["error_code"] == "not_ready"
        wait_done(client, job_id)

    def test_concurrent_submissions_distinct(self, client):
        ids = [submit(client).json()["job_id"] for _ in range(10)]
        assert len(set(ids)) == 10
        for job_id in ids:
            assert wait_done(client, job_id)["state"] == "done"


class TestHealth:
    def test_fixture_mode_health(self, client):
        flags = client.get("/v1/health").json()
        assert flags == {"live": True, "overpass_ok": True, "provider_ok": True}

    def test_cached_within_window(self, client):
        first = client.get("/v1/health").json()
        second = client.get("/v1/health").json()
        assert first == second
        assert HEALTH_CACHE_S == 30.0


class TestDryrun:
    def test_matches_without_vlm(self, client):
        resp = client.post("/v1/dryrun", json={
            "camera": {"lat": 22.3364, "lon": 114.2655, "heading_deg": 0.0},
            "features": [{
                "name": "left building", "angle_span": [-70, -30],
                "distance_range": [12, 28], "category": "building",
            }],
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["matches"][0]["matched_id"] == "way/101"
        assert body["matches"][0]["r_norm"] > 0.5
        assert any(f["id"] == "way/101" for f in body["scene_features"])

    def test_heading_changes_matches(self, client):
        def run(heading):
            return client.post("/v1/dryrun", json={
                "camera": {"lat": 22.3364, "lon": 114.2655, "heading_deg": heading},
                "features": [{
                    "name": "b", "angle_span": [-70, -30],
                    "distance_range": [12, 28], "category": "building",
                }],
            }).json()["matches"][0]["matched_id"]

        assert run(0.0) == "way/101"
        assert run(100.0) == "way/103"

    def test_matches_agree_with_cli_run(self, client, tmp_path):
        """Dry-run on the camera and detected features of a fixture scene
        highlights exactly the features a full CLI run matches."""
        from click.testing import CliRunner

        from autotour.cli import main as cli_main

        out = tmp_path / "result.json"
        res = CliRunner().invoke(cli_main, [
            "run", "--mode", "fixture", "--scenario", "harbour_walk",
            "--out", str(out),
        ])
        assert res.exit_code == 0, res.output
        doc = json.loads(out.read_text())
        cli_matched = {
            a["label"]: a["matched_feature_id"]
            for a in doc["annotations"]
            if a["matched_feature_id"] is not None
        }

        manifest = json.loads(
            Path("fixtures/harbour_walk/manifest.json").read_text()
        )
        detect_dir = Path("fixtures/harbour_walk/vlm/detect")
        sample = next(detect_dir.glob("*.txt")).read_text()
        features = [
            {
                "name": pf.name,
                "angle_span": [pf.angle_span[0], pf.angle_span[1]],
                "distance_range": [pf.distance_range[0], pf.distance_range[1]],
                "description": pf.description,
            }
            for pf in photo_features.parse_detection_output(sample)
        ]
        resp = client.post("/v1/dryrun", json={
            "camera": {
                "lat": manifest["center"]["lat"],
                "lon": manifest["center"]["lon"],
                "heading_deg": manifest["camera"]["heading_deg"],
            },
            "features": features,
        })
        assert resp.status_code == 200
        dryrun_matched = {
            m["feature"]: m["matched_id"]
            for m in resp.json()["matches"]
            if m["matched_id"] is not None
        }
        assert dryrun_matched == cli_matched
        assert dryrun_matched  # the fixture scene does produce matches

    def test_invalid_feature_rejected(self, client):
        resp = client.post("/v1/dryrun", json={
            "camera": {"lat": 22.3364, "lon": 114.2655, "heading_deg": 0.0},
            "features": [{"name": "x", "angle_span": [30, -30],
                          "distance_range": [5, 20]}],
        })
        assert resp.status_code == 422

    def test_invalid_body_rejected(self, client):
        resp = client.post("/v1/dryrun", content=b"not json",
                           headers={"content-type": "application/json"})
        assert resp.status_code == 422


class TestFailureReporting:
    def test_failed_job_names_stage(self, tmp_path):
        # scenario with detection responses but no map snapshot: the geo
        # branch fails at osm_fetch while the rest of the pipeline is fine
        scene = tmp_path / "broken"
        (scene / "vlm" / "detect").mkdir(parents=True)
        source = Path("fixtures/harbour_walk/vlm/detect/default.txt")
        (scene / "vlm" / "detect" / "default.txt").write_text(
            source.read_text(encoding="utf-8"), encoding="utf-8")
        cfg = dataclasses.replace(
            load_config(), mode="fixture", scenario="broken", fixtures_root=tmp_path,
        )
        with TestClient(create_app(cfg)) as client:
            job_id = submit(client).json()["job_id"]
            status = wait_done(client, job_id)
            assert status["state"] == "failed"
            resp = client.get(f"/v1/jobs/{job_id}/result")
            assert resp.status_code == 500
            body = resp.json()
            assert body["error_code"] == "job_failed"
            assert "osm_fetch" in body["message"]
