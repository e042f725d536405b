/**
 * Geometry helpers for the explore canvas: project local-frame metres
 * (camera at origin, north up) onto canvas pixels and build drawable
 * paths for feature polygons, the FOV wedge, and per-feature sectors.
 * Pure functions; the canvas draw loop in main.ts consumes them.
 */

import type { CameraMeta, DryrunResponse, SceneFeature } from './types';

export interface CanvasSpec {
  width: number;
  height: number;
  /** pixels per metre */
  scale: number;
}

export type Pt = [number, number];

/** Local metres (x east, y north) -> canvas pixels (y grows downward). */
export function toCanvas(x: number, y: number, spec: CanvasSpec): Pt {
  return [spec.width / 2 + x * spec.scale, spec.height / 2 - y * spec.scale];
}

/** Scale that fits a scene radius inside the canvas with a small margin. */
export function fitScale(radiusM: number, spec: Pick<CanvasSpec, 'width' | 'height'>): number {
  const extent = Math.min(spec.width, spec.height) / 2;
  return (0.92 * extent) / radiusM;
}

export function polygonPath(polygon: [number, number][], spec: CanvasSpec): Pt[] {
  return polygon.map(([x, y]) => toCanvas(x, y, spec));
}

function onArc(radius: number, bearingDeg: number): Pt {
  const rad = (bearingDeg * Math.PI) / 180;
  return [radius * Math.sin(rad), radius * Math.cos(rad)];
}

/** Wedge showing the camera's field of view, as a closed point list. */
export function fovWedgePath(camera: CameraMeta, radiusM: number, spec: CanvasSpec): Pt[] {
  const fov = camera.fov_deg ?? 60;
  const start = camera.heading_deg - fov / 2;
  const pts: Pt[] = [toCanvas(0, 0, spec)];
  const steps = Math.max(8, Math.ceil(fov / 5));
  for (let i = 0; i <= steps; i++) {
    const [x, y] = onArc(radiusM, start + (fov * i) / steps);
    pts.push(toCanvas(x, y, spec));
  }
  return pts;
}

/** Half-ring search region for one photo feature, as a closed point list. */
export function sectorPath(
  camera: CameraMeta,
  angleSpan: [number, number],
  distanceRange: [number, number],
  spec: CanvasSpec,
): Pt[] {
  const [a0, a1] = angleSpan;
  const [d0, d1] = distanceRange;
  const start = camera.heading_deg + a0;
  const span = a1 - a0;
  const steps = Math.max(8, Math.ceil(span / 5));
  const pts: Pt[] = [];
  for (let i = 0; i <= steps; i++) {
    const [x, y] = onArc(d1, start + (span * i) / steps);
    pts.push(toCanvas(x, y, spec));
  }
  for (let i = steps; i >= 0; i--) {
    const [x, y] = onArc(d0, start + (span * i) / steps);
    pts.push(toCanvas(x, y, spec));
  }
  return pts;
}

export interface FeatureDrawItem {
  feature: SceneFeature;
  path: Pt[];
  matchedBy: string | null;
}

/** Scene polygons paired with which photo feature (if any) matched them. */
export function featureDrawList(response: DryrunResponse, spec: CanvasSpec): FeatureDrawItem[] {
  const matchedBy = new Map<string, string>();
  for (const m of response.matches) {
    if (m.matched_id !== null) matchedBy.set(m.matched_id, m.feature);
  }
  return response.scene_features.map((f) => ({
    feature: f,
    path: polygonPath(f.polygon, spec),
    matchedBy: matchedBy.get(f.id) ?? null,
  }));
}

/** Heading from the camera toward a canvas point, for drag-to-rotate. */
export function headingForCanvasPoint(px: number, py: number, spec: CanvasSpec): number {
  const x = (px - spec.width / 2) / spec.scale;
  const y = (spec.height / 2 - py) / spec.scale;
  const deg = (Math.atan2(x, y) * 180) / Math.PI;
  return (deg + 360) % 360;
}
