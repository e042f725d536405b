"""REST service exposing asynchronous photo-analysis jobs, health, and a
what-if dry-run matching endpoint.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import pipeline
from .config import AppConfig, load_config
from .geo_core import GeoPoint
from .matcher import match_scene
from .osm_ingest import FeatureCategory
from .photo_features import PhotoFeature
from .presentation import SceneResult, serialize_result
from .scene_filter import CameraPose

HEALTH_CACHE_S = 30.0

QUEUED, RUNNING, DONE, FAILED = "queued", "running", "done", "failed"


class ServiceError(Exception):
    def __init__(self, status: int, error_code: str, message: str):
        super().__init__(message)
        self.status = status
        self.error_code = error_code
        self.message = message


@dataclass
class Job:
    id: str
    state: str = QUEUED
    submitted_at: float = field(default_factory=time.time)
    finished_at: Optional[float] = None
    result: Optional[SceneResult] = None
    error: Optional[str] = None
    failed_stage: Optional[str] = None
    progress: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class JobStore:
    """In-memory job store; per-job access is serialized by the job's own
    lock.  Jobs expire after a TTL and then read as not found.
    """

    def __init__(self, ttl_s: float):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._ttl_s = ttl_s

    def create(self) -> Job:
        job = Job(id=uuid.uuid4().hex)
        with self._lock:
            self._jobs[job.id] = job
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            self._purge()
            job = self._jobs.get(job_id)
        if job is None:
            raise ServiceError(404, "job_not_found", f"no job with id {job_id!r}")
        return job

    def _purge(self) -> None:
        now = time.time()
        expired = [
            jid for jid, j in self._jobs.items()
            if j.finished_at is not None and now - j.finished_at > self._ttl_s
        ]
        for jid in expired:
            del self._jobs[jid]


def _parse_meta(meta: str, config: AppConfig) -> CameraPose:
    try:
        payload = json.loads(meta)
        camera = CameraPose(
            position=GeoPoint(float(payload["lat"]), float(payload["lon"])),
            heading=float(payload["heading_deg"]),
            fov_deg=float(payload.get("fov_deg", config.fov_deg)),
            fov_margin_deg=float(payload.get("fov_margin_deg", config.fov_margin_deg)),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ServiceError(422, "invalid_metadata", f"invalid camera metadata: {exc}") from exc
    return camera


def _parse_photo_features(raw: list[dict]) -> list[PhotoFeature]:
    features = []
    for item in raw:
        try:
            category = FeatureCategory(item.get("category", "other"))
            features.append(PhotoFeature(
                name=item["name"],
                angle_span=(float(item["angle_span"][0]), float(item["angle_span"][1])),
                description=item.get("description", ""),
                distance_range=(
                    float(item["distance_range"][0]), float(item["distance_range"][1])
                ),
                category=category,
            ))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ServiceError(
                422, "invalid_metadata", f"invalid photo feature {item!r}: {exc}"
            ) from exc
    return features


class HealthCache:
    def __init__(self, config: AppConfig):
        self._config = config
        self._lock = threading.Lock()
        self._checked_at: Optional[float] = None
        self._flags: dict = {}

    def probe(self) -> dict:
        with self._lock:
            now = time.time()
            if self._checked_at is not None and now - self._checked_at <= HEALTH_CACHE_S:
                return dict(self._flags)
            self._flags = {
                "live": True,
                "overpass_ok": self._overpass_ok(),
                "provider_ok": self._provider_ok(),
            }
            self._checked_at = now
            return dict(self._flags)

    def _overpass_ok(self) -> bool:
        cfg = self._config
        if cfg.mode == "fixture":
            return bool(
                cfg.scenario and (cfg.fixture_dir(cfg.scenario) / "overpass.json").is_file()
            )
        import requests

        try:
            requests.head(cfg.overpass_endpoint, timeout=5)
            return True
        except requests.RequestException:
            return False

    def _provider_ok(self) -> bool:
        try:
            pipeline.provider_for(self._config)
            return True
        except Exception:
            return False


def create_app(config: Optional[AppConfig] = None) -> FastAPI:
    config = config or load_config()
    app = FastAPI(title="autotour")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    store = JobStore(ttl_s=config.job_ttl_s)
    health = HealthCache(config)
    workers = ThreadPoolExecutor(max_workers=config.max_concurrent_jobs)
    app.state.config = config
    app.state.job_store = store

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"error_code": exc.error_code, "message": exc.message},
        )

    def run_job(job: Job, photo: bytes, camera: CameraPose) -> None:
        def on_stage(stage: str, ms: float) -> None:
            with job.lock:
                job.progress.append({"stage": stage, "ms": round(ms, 3), "t": time.time()})

        with job.lock:
            job.state = RUNNING
        try:
            result = pipeline.analyze(photo, camera, config, on_stage=on_stage)
        except pipeline.PipelineError as exc:
            with job.lock:
                job.state = FAILED
                job.error = str(exc)
                job.failed_stage = exc.stage
                job.finished_at = time.time()
            return
        except Exception as exc:  # defensive: never leave a job running
            with job.lock:
                job.state = FAILED
                job.error = str(exc)
                job.finished_at = time.time()
            return
        with job.lock:
            job.state = DONE
            job.result = result
            job.finished_at = time.time()

    @app.post("/v1/jobs", status_code=202)
    async def submit_job(photo: UploadFile = File(...), meta: str = Form(...)):
        data = await photo.read()
        if len(data) > config.max_photo_bytes:
            raise ServiceError(
                413, "payload_too_large",
                f"photo exceeds {config.max_photo_bytes} byte limit",
            )
        if not data:
            raise ServiceError(422, "invalid_metadata", "photo must be non-empty")
        camera = _parse_meta(meta, config)
        job = store.create()
        workers.submit(run_job, job, data, camera)
        return {"job_id": job.id}

    @app.get("/v1/jobs/{job_id}/status")
    async def get_status(job_id: str):
        job = store.get(job_id)
        with job.lock:
            return {"state": job.state, "progress": list(job.progress)}

    @app.get("/v1/jobs/{job_id}/result")
    async def get_result(job_id: str):
        job = store.get(job_id)
        with job.lock:
            if job.state == FAILED:
                stage = f" in stage {job.failed_stage!r}" if job.failed_stage else ""
                raise ServiceError(500, "job_failed", f"job failed{stage}: {job.error}")
            if job.state != DONE or job.result is None:
                raise ServiceError(409, "not_ready", f"job is {job.state}")
            document = serialize_result(job.result)
        return Response(content=document, media_type="application/json")

    @app.get("/v1/health")
    async def get_health():
        return health.probe()

    @app.post("/v1/dryrun")
    async def dryrun(request: Request):
        """Match caller-supplied photo features against the visible scene
        without any vision-model calls; powers interactive exploration.
        """
        try:
            payload = await request.json()
        except Exception as exc:
            raise ServiceError(422, "invalid_metadata", f"invalid JSON body: {exc}") from exc
        cam = payload.get("camera") or {}
        camera = _parse_meta(json.dumps(cam), config)
        pfs = _parse_photo_features(payload.get("features") or [])
        scene = payload.get("scene") or config.scenario
        clock = pipeline._StageClock()
        try:
            gfs = pipeline.geo_branch(camera, config, clock, scene)
        except pipeline.PipelineError as exc:
            raise ServiceError(500, "pipeline_error", str(exc)) from exc
        matches = match_scene(pfs, gfs, camera, config.match_threshold)
        return {
            "scene_features": [
                {
                    "id": gf.id,
                    "name": gf.display_name,
                    "category": gf.category.value,
                    "distance_m": round(gf.distance_m, 2),
                    "interval": [gf.angular_interval.start, gf.angular_interval.end],
                    "polygon": [[round(p.x, 2), round(p.y, 2)] for p in gf.local_polygon.vertices],
                }
                for gf in gfs
            ],
            "matches": [
                {
                    "feature": m.photo_feature.name,
                    "matched_id": m.matched.id if m.matched else None,
                    "matched_name": m.matched.display_name if m.matched else None,
                    "r_norm": round(m.r_norm, 6),
                    "a_overlap": round(m.a_overlap, 3),
                }
                for m in matches
            ],
        }

    return app
