/**
 * Browser entry point: wires the explore canvas, the heading/FOV
 * controls, photo submission, and the result view to the service API.
 */

import { AutotourClient } from './api';
import {
  fitScale,
  featureDrawList,
  fovWedgePath,
  headingForCanvasPoint,
  sectorPath,
  type CanvasSpec,
  type Pt,
} from './exploreView';
import { DryrunScheduler, initialState, withHeading, type ExplorerState } from './explorer';
import { annotationBoxes, failureCard, stageChecklist } from './resultView';
import type { DryrunResponse, SceneResultDoc } from './types';

const SCENE_RADIUS_M = 120;

const serviceOrigin =
  new URLSearchParams(location.search).get('service') ?? 'http://localhost:8000';
const client = new AutotourClient(serviceOrigin);

const canvas = document.getElementById('explore') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const headingInput = document.getElementById('heading') as HTMLInputElement;
const headingLabel = document.getElementById('heading-label') as HTMLSpanElement;
const latInput = document.getElementById('lat') as HTMLInputElement;
const lonInput = document.getElementById('lon') as HTMLInputElement;
const featuresInput = document.getElementById('features') as HTMLTextAreaElement;
const statusLine = document.getElementById('status') as HTMLDivElement;
const photoInput = document.getElementById('photo') as HTMLInputElement;
const submitBtn = document.getElementById('submit') as HTMLButtonElement;
const resultPane = document.getElementById('result') as HTMLDivElement;

let state: ExplorerState = initialState({
  lat: parseFloat(latInput.value),
  lon: parseFloat(lonInput.value),
  heading_deg: parseFloat(headingInput.value),
  fov_deg: 60,
});
let lastResponse: DryrunResponse | null = null;

function spec(): CanvasSpec {
  return {
    width: canvas.width,
    height: canvas.height,
    scale: fitScale(SCENE_RADIUS_M, canvas),
  };
}

function strokePath(pts: Pt[], stroke: string, fill?: string): void {
  if (pts.length < 2) return;
  ctx.beginPath();
  ctx.moveTo(pts[0][0], pts[0][1]);
  for (const [x, y] of pts.slice(1)) ctx.lineTo(x, y);
  ctx.closePath();
  if (fill) {
    ctx.fillStyle = fill;
    ctx.fill();
  }
  ctx.strokeStyle = stroke;
  ctx.stroke();
}

function redraw(): void {
  const s = spec();
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  strokePath(fovWedgePath(state.camera, SCENE_RADIUS_M, s), '#7aa', 'rgba(120,170,170,0.15)');
  if (state.overlays.sectors) {
    for (const f of state.features) {
      strokePath(sectorPath(state.camera, f.angle_span, f.distance_range, s), '#c80');
    }
  }
  if (lastResponse) {
    for (const item of featureDrawList(lastResponse, s)) {
      const matched = item.matchedBy !== null;
      strokePath(item.path, matched ? '#2a7' : '#999', matched ? 'rgba(40,170,110,0.25)' : undefined);
    }
  }
  // camera dot
  ctx.fillStyle = '#d33';
  ctx.beginPath();
  ctx.arc(canvas.width / 2, canvas.height / 2, 4, 0, 2 * Math.PI);
  ctx.fill();
}

const scheduler = new DryrunScheduler(
  client,
  (r) => {
    lastResponse = r;
    statusLine.textContent = `${r.scene_features.length} candidates, ${
      r.matches.filter((m) => m.matched_id !== null).length
    } matched`;
    redraw();
  },
  (err) => {
    statusLine.textContent = `dry-run failed: ${err instanceof Error ? err.message : err}`;
  },
);

function parseFeatures(): void {
  try {
    state = { ...state, features: JSON.parse(featuresInput.value) };
    statusLine.textContent = '';
  } catch {
    statusLine.textContent = 'feature JSON is invalid';
  }
}

function refresh(): void {
  headingLabel.textContent = `${state.camera.heading_deg.toFixed(0)}°`;
  redraw();
  void scheduler.update(state);
}

headingInput.addEventListener('input', () => {
  state = withHeading(state, parseFloat(headingInput.value));
  refresh();
});
canvas.addEventListener('click', (ev) => {
  const rect = canvas.getBoundingClientRect();
  const h = headingForCanvasPoint(ev.clientX - rect.left, ev.clientY - rect.top, spec());
  headingInput.value = h.toFixed(0);
  state = withHeading(state, h);
  refresh();
});
for (const input of [latInput, lonInput]) {
  input.addEventListener('change', () => {
    state = {
      ...state,
      camera: { ...state.camera, lat: parseFloat(latInput.value), lon: parseFloat(lonInput.value) },
    };
    refresh();
  });
}
featuresInput.addEventListener('change', () => {
  parseFeatures();
  refresh();
});

function renderResult(doc: SceneResultDoc): void {
  const viewport = { width: 800, height: 600 };
  const boxes = annotationBoxes(doc, viewport)
    .map(
      (b) =>
        `<div class="box" style="left:${b.rect.x}px;top:${b.rect.y}px;` +
        `width:${b.rect.width}px;height:${b.rect.height}px" title="${b.description}">` +
        `<span>${b.label}</span></div>`,
    )
    .join('');
  const cards = doc.annotations
    .map(
      (a) =>
        `<div class="card${a.matched_feature_id ? ' matched' : ''}">` +
        `<strong>${a.label}</strong> <em>${a.r_norm}</em><p>${a.description}</p></div>`,
    )
    .join('');
  resultPane.innerHTML =
    `<div class="photo-frame" style="width:800px;height:600px">${boxes}</div>` +
    `<div class="cards">${cards}</div><pre class="tour">${doc.tour_text}</pre>`;
}

submitBtn.addEventListener('click', async () => {
  const file = photoInput.files?.[0];
  if (!file) {
    statusLine.textContent = 'choose a photo first';
    return;
  }
  submitBtn.disabled = true;
  try {
    const jobId = await client.submitJob(file, state.camera);
    const final = await client.pollUntilDone(jobId, (st) => {
      const rows = stageChecklist(st);
      statusLine.textContent = rows
        .map((r) => `${r.done ? '✓' : '·'} ${r.stage}`)
        .join('  ');
    });
    if (final.state === 'done') {
      renderResult(await client.getResult(jobId));
      statusLine.textContent = 'done';
    } else {
      try {
        await client.getResult(jobId);
      } catch (err) {
        const card = failureCard(err instanceof Error ? err.message : String(err));
        resultPane.innerHTML =
          `<div class="error-card"><strong>${card.title}</strong>` +
          (card.stage ? `<p>stage: ${card.stage}</p>` : '') +
          `<p>${card.message}</p></div>`;
      }
    }
  } catch (err) {
    statusLine.textContent = err instanceof Error ? err.message : String(err);
  } finally {
    submitBtn.disabled = false;
  }
});

parseFeatures();
refresh();
