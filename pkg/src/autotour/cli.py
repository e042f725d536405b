"""Batch command-line driver: run the pipeline on photos or stored
fixture scenes, evaluate against ground truth, and capture fixtures.

Exit codes: 0 success, 1 pipeline error, 2 configuration error.
"""

from __future__ import annotations

import dataclasses
import glob as globlib
import json
import sys
import time
from pathlib import Path

import click

from . import osm_ingest, pipeline
from .config import AppConfig, ConfigError, load_config
from .evalkit import SystemCounts, ZeroDenominator, score_scene, system_metrics
from .geo_core import GeoPoint
from .presentation import serialize_result
from .scene_filter import CameraPose

EXIT_OK = 0
EXIT_PIPELINE = 1
EXIT_CONFIG = 2


def _load_base_config() -> AppConfig:
    try:
        return load_config()
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _print_timings(timings_ms: dict[str, float]) -> None:
    click.echo("stage timings:")
    for stage, ms in timings_ms.items():
        click.echo(f"  {stage:<14} {ms:9.1f} ms")


@click.group()
def main() -> None:
    """Match photo landmarks against map features and narrate the scene."""


@main.command()
@click.option("--photo", type=click.Path(path_type=Path), default=None,
              help="Photo file; defaults to the fixture scene's stored photo.")
@click.option("--lat", type=float, default=None)
@click.option("--lon", type=float, default=None)
@click.option("--heading", type=float, default=None)
@click.option("--fov", type=float, default=None)
@click.option("--radius", type=float, default=None)
@click.option("--mode", type=click.Choice(["live", "fixture"]), default=None)
@click.option("--scenario", default=None, help="Fixture scene name.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output file for the result document (default stdout).")
def run(photo, lat, lon, heading, fov, radius, mode, scenario, out) -> None:
    """Analyze one photo and write the scene result document."""
    config = _load_base_config()
    updates: dict = {}
    if mode:
        updates["mode"] = mode
    if scenario:
        updates["scenario"] = scenario
    if radius is not None:
        updates["radius_m"] = radius
    if fov is not None:
        updates["fov_deg"] = fov
    config = dataclasses.replace(config, **updates)

    if config.mode == "fixture" and not config.scenario:
        click.echo("error: fixture mode requires --scenario", err=True)
        sys.exit(EXIT_CONFIG)
    if photo is not None and not photo.is_file():
        click.echo(f"error: photo not found: {photo}", err=True)
        sys.exit(EXIT_CONFIG)

    try:
        if config.mode == "fixture":
            scene_dir = config.fixture_dir(config.scenario)
            if not scene_dir.is_dir():
                click.echo(f"error: unknown fixture scene {config.scenario!r}", err=True)
                sys.exit(EXIT_CONFIG)
            manifest = pipeline.load_manifest(scene_dir)
            camera = pipeline.camera_from_manifest(manifest, config)
            if heading is not None or lat is not None or lon is not None:
                camera = CameraPose(
                    position=GeoPoint(
                        lat if lat is not None else camera.position.lat,
                        lon if lon is not None else camera.position.lon,
                    ),
                    heading=heading if heading is not None else camera.heading,
                    fov_deg=camera.fov_deg,
                    fov_margin_deg=camera.fov_margin_deg,
                )
            photo_path = photo or scene_dir / manifest.get("photo", "photo.png")
            photo_bytes = photo_path.read_bytes() if Path(photo_path).is_file() else b""
            result = pipeline.analyze(
                photo_bytes, camera, config,
                provider=pipeline.provider_for(
                    dataclasses.replace(config, scenario=config.scenario)
                ),
                scene=config.scenario,
            )
        else:
            if photo is None or lat is None or lon is None or heading is None:
                click.echo("error: live mode requires --photo --lat --lon --heading", err=True)
                sys.exit(EXIT_CONFIG)
            camera = CameraPose(
                position=GeoPoint(lat, lon), heading=heading,
                fov_deg=config.fov_deg, fov_margin_deg=config.fov_margin_deg,
            )
            result = pipeline.analyze(photo.read_bytes(), camera, config)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except pipeline.PipelineError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PIPELINE)

    document = serialize_result(result)
    if out is not None:
        Path(out).write_text(document, encoding="utf-8")
        click.echo(f"result written to {out}")
    else:
        click.echo(document, nl=False)
    _print_timings(result.timings_ms)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--scenes", required=True,
              help="Glob of fixture scene directories (each with ground_truth.json).")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Machine-readable summary file (JSON).")
def evaluate(scenes, out) -> None:
    """Score fixture scenes against their ground truth."""
    config = _load_base_config()
    scene_dirs = sorted(p for p in globlib.glob(scenes) if Path(p).is_dir())
    if not scene_dirs:
        click.echo(f"error: no scenes match {scenes!r}", err=True)
        sys.exit(EXIT_CONFIG)

    per_scene: dict[str, dict] = {}
    skipped: list[str] = []
    total = SystemCounts()
    for scene_dir in scene_dirs:
        scene_path = Path(scene_dir)
        name = scene_path.name
        truth_path = scene_path / "ground_truth.json"
        if not truth_path.is_file():
            skipped.append(name)
            continue
        truth = json.loads(truth_path.read_text(encoding="utf-8"))
        cfg = dataclasses.replace(
            config, mode="fixture", scenario=name, fixtures_root=scene_path.parent,
        )
        try:
            result = pipeline.run_fixture_scene(name, cfg)
        except pipeline.PipelineError as exc:
            click.echo(f"error: scene {name}: {exc}", err=True)
            sys.exit(EXIT_PIPELINE)
        counts = score_scene(result, truth)
        total = total + counts
        try:
            per_scene[name] = system_metrics(counts)
        except ZeroDenominator as exc:
            per_scene[name] = {"error": str(exc)}

    try:
        aggregate = system_metrics(total)
    except ZeroDenominator as exc:
        click.echo(f"error: aggregate metrics undefined: {exc}", err=True)
        sys.exit(EXIT_PIPELINE)

    click.echo(f"{'scene':<20} {'IR':>6} {'IP':>6} {'MR':>6} {'MP':>6}")
    for name, m in per_scene.items():
        if "error" in m:
            click.echo(f"{name:<20} {m['error']}")
        else:
            click.echo(
                f"{name:<20} {m['IR']:>6.3f} {m['IP']:>6.3f} {m['MR']:>6.3f} {m['MP']:>6.3f}"
            )
    click.echo(
        f"{'aggregate':<20} {aggregate['IR']:>6.3f} {aggregate['IP']:>6.3f} "
        f"{aggregate['MR']:>6.3f} {aggregate['MP']:>6.3f}"
    )
    for name in skipped:
        click.echo(f"skipped (no ground truth): {name}")

    summary = {"scenes": per_scene, "aggregate": aggregate, "skipped": skipped}
    if out is not None:
        Path(out).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        click.echo(f"summary written to {out}")
    sys.exit(EXIT_OK)


@main.group()
def fixture() -> None:
    """Manage stored map fixtures."""


@fixture.command()
@click.option("--lat", type=float, required=True)
@click.option("--lon", type=float, required=True)
@click.option("--radius", type=float, default=None)
@click.option("--name", required=True)
@click.option("--force", is_flag=True, default=False)
def capture(lat, lon, radius, name, force) -> None:
    """Fetch a live Overpass snapshot and store it as a named fixture."""
    config = _load_base_config()
    radius = radius if radius is not None else config.radius_m
    scene_dir = config.fixture_dir(name)
    if scene_dir.exists() and not force:
        click.echo(f"error: fixture {name!r} exists; use --force to overwrite", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        center = GeoPoint(lat, lon)
        query = osm_ingest.build_overpass_query(center, radius)
    except (ValueError, osm_ingest.RadiusOutOfRange) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        doc = osm_ingest.fetch_elements(query, config.overpass_endpoint, mode="live")
        elements = osm_ingest.parse_overpass(doc)
    except osm_ingest.IngestError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PIPELINE)
    scene_dir.mkdir(parents=True, exist_ok=True)
    (scene_dir / "overpass.json").write_text(doc, encoding="utf-8")
    counts = {"node": 0, "way": 0, "relation": 0}
    for el in elements:
        counts[el.kind] = counts.get(el.kind, 0) + 1
    manifest = {
        "name": name,
        "center": {"lat": lat, "lon": lon},
        "radius_m": radius,
        "query": query,
        "captured_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "element_counts": counts,
        "camera": {"heading_deg": 0.0},
    }
    (scene_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    click.echo(
        f"captured {counts.get('node', 0)} nodes, {counts.get('way', 0)} ways, "
        f"{counts.get('relation', 0)} relations to {scene_dir}"
    )
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
