import { describe, expect, it } from 'vitest';

import {
  PIPELINE_STAGES,
  annotationAt,
  annotationBoxes,
  failureCard,
  featureCards,
  stageChecklist,
} from '../src/resultView';
import type { Annotation, SceneResultDoc } from '../src/types';

function annotation(overrides: Partial<Annotation>): Annotation {
  return {
    label: 'tall building',
    bounding_box: [0.0, 0.0, 0.62, 1.0],
    crop_range: null,
    modified: 'no',
    matched_feature_id: 'way/101',
    r_norm: '0.9014',
    description: 'A tall building.',
    ...overrides,
  };
}

function doc(annotations: Annotation[]): SceneResultDoc {
  return {
    schema_version: 1,
    photo_id: 'photo',
    camera: { lat: 0, lon: 0, heading_deg: 0 },
    annotations,
    tour_text: '',
    unmatched: [],
  };
}

describe('annotationBoxes', () => {
  it('scales relative boxes to the viewport and skips refused groundings', () => {
    const boxes = annotationBoxes(
      doc([annotation({}), annotation({ label: 'no box', bounding_box: null })]),
      { width: 800, height: 600 },
    );
    expect(boxes).toHaveLength(1);
    expect(boxes[0].rect).toEqual({ x: 0, y: 0, width: 496, height: 600 });
  });

  it('finds the annotation under a tap, preferring the topmost', () => {
    const boxes = annotationBoxes(
      doc([
        annotation({ label: 'under', bounding_box: [0, 0, 1, 1] }),
        annotation({ label: 'over', bounding_box: [0.4, 0.4, 0.6, 0.6] }),
      ]),
      { width: 100, height: 100 },
    );
    expect(annotationAt(boxes, 50, 50)?.label).toBe('over');
    expect(annotationAt(boxes, 5, 5)?.label).toBe('under');
    expect(annotationAt(boxes, -1, 50)).toBeNull();
  });
});

describe('stageChecklist', () => {
  it('marks completed stages with their duration, pending ones without', () => {
    const rows = stageChecklist({
      state: 'running',
      progress: [
        { stage: 'osm_fetch', ms: 3, t: 1 },
        { stage: 'osm_parse', ms: 5, t: 2 },
      ],
    });
    expect(rows.map((r) => r.stage)).toEqual([...PIPELINE_STAGES]);
    expect(rows[0]).toEqual({ stage: 'osm_fetch', done: true, ms: 3 });
    expect(rows[4].done).toBe(false);
    expect(rows[4].ms).toBeNull();
  });
});

describe('failureCard', () => {
  it('extracts the failing stage from the service message', () => {
    const card = failureCard("analysis failed in stage 'osm_fetch': fixture missing");
    expect(card.stage).toBe('osm_fetch');
    expect(card.title).toBe('Analysis failed');
  });

  it('copes with messages that name no stage', () => {
    expect(failureCard('boom').stage).toBeNull();
  });
});

describe('featureCards', () => {
  it('lists matched annotations before unmatched ones', () => {
    const cards = featureCards(
      doc([
        annotation({ label: 'zebra crossing', matched_feature_id: null }),
        annotation({ label: 'arch', matched_feature_id: 'way/2' }),
      ]),
    );
    expect(cards.map((c) => c.label)).toEqual(['arch', 'zebra crossing']);
  });
});
