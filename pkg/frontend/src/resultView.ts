/**
 * Pure view-model helpers for the result screen: annotation boxes over
 * the photo, the per-stage progress checklist, and the failed-job card.
 * Kept DOM-free so they can be unit tested directly.
 */

import { relativeToPixels, type PixelRect, type Viewport } from './pixels';
import type { Annotation, JobStatus, SceneResultDoc } from './types';

export interface AnnotationBox {
  label: string;
  rect: PixelRect;
  description: string;
  matchedFeatureId: string | null;
  modified: boolean;
}

/** Boxes to draw for a finished job, scaled to the current viewport. */
export function annotationBoxes(doc: SceneResultDoc, viewport: Viewport): AnnotationBox[] {
  const boxes: AnnotationBox[] = [];
  for (const a of doc.annotations) {
    if (a.bounding_box === null) continue;
    boxes.push({
      label: a.label,
      rect: relativeToPixels(a.bounding_box, viewport),
      description: a.description,
      matchedFeatureId: a.matched_feature_id,
      modified: a.modified === 'yes',
    });
  }
  return boxes;
}

/** The annotation whose box contains the tapped point, topmost-last. */
export function annotationAt(
  boxes: AnnotationBox[],
  px: number,
  py: number,
): AnnotationBox | null {
  for (let i = boxes.length - 1; i >= 0; i--) {
    const b = boxes[i].rect;
    if (px >= b.x && px <= b.x + b.width && py >= b.y && py <= b.y + b.height) {
      return boxes[i];
    }
  }
  return null;
}

export interface StageRow {
  stage: string;
  done: boolean;
  ms: number | null;
}

/** All pipeline stages in execution order, for the progress checklist. */
export const PIPELINE_STAGES = [
  'osm_fetch',
  'osm_parse',
  'unify',
  'geo_features',
  'scene_filter',
  'vlm_detect',
  'matching',
  'grounding',
  'describe',
  'assemble',
] as const;

/** Checklist rows: completed stages carry their measured duration. */
export function stageChecklist(status: JobStatus): StageRow[] {
  const seen = new Map(status.progress.map((p) => [p.stage, p.ms]));
  return PIPELINE_STAGES.map((stage) => ({
    stage,
    done: seen.has(stage),
    ms: seen.get(stage) ?? null,
  }));
}

export interface ErrorCard {
  title: string;
  stage: string | null;
  message: string;
}

/** Card shown when a job fails; names the stage when the service did. */
export function failureCard(message: string): ErrorCard {
  const m = /in stage '([^']+)'/.exec(message);
  return {
    title: 'Analysis failed',
    stage: m ? m[1] : null,
    message,
  };
}

/** One line per feature for the bottom sheet, matched features first. */
export function featureCards(doc: SceneResultDoc): Annotation[] {
  return [...doc.annotations].sort((a, b) => {
    const am = a.matched_feature_id !== null ? 0 : 1;
    const bm = b.matched_feature_id !== null ? 0 : 1;
    return am - bm || a.label.localeCompare(b.label);
  });
}
