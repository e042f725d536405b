/**
 * Explorer state and the latest-wins dry-run scheduler.
 *
 * Every interaction (heading drag, feature edit) requests a re-match
 * from the service; a newer interaction aborts the in-flight request so
 * at most one dry-run call is outstanding and the displayed matches
 * always correspond to the newest state.
 */

import type { AutotourClient } from './api';
import type { CameraMeta, DryrunResponse, PhotoFeatureSpec } from './types';

export interface ExplorerState {
  camera: CameraMeta;
  features: PhotoFeatureSpec[];
  selectedFeature: string | null;
  overlays: { sectors: boolean; intervals: boolean; occluded: boolean };
}

export function initialState(camera: CameraMeta): ExplorerState {
  return {
    camera: { ...camera, heading_deg: normalizeHeading(camera.heading_deg) },
    features: [],
    selectedFeature: null,
    overlays: { sectors: true, intervals: true, occluded: false },
  };
}

export function normalizeHeading(deg: number): number {
  const h = deg % 360;
  return h < 0 ? h + 360 : h;
}

export function withHeading(state: ExplorerState, heading: number): ExplorerState {
  return {
    ...state,
    camera: { ...state.camera, heading_deg: normalizeHeading(heading) },
  };
}

export function withFeature(
  state: ExplorerState,
  name: string,
  update: Partial<PhotoFeatureSpec>,
): ExplorerState {
  return {
    ...state,
    features: state.features.map((f) => (f.name === name ? { ...f, ...update } : f)),
  };
}

type AbortControllerFactory = () => AbortController;

export class DryrunScheduler {
  private inflight: AbortController | null = null;
  private generation = 0;
  /** total requests actually issued, observable by tests */
  requestCount = 0;

  constructor(
    private readonly client: AutotourClient,
    private readonly onResult: (r: DryrunResponse) => void,
    private readonly onError: (err: unknown) => void = () => {},
    private readonly makeController: AbortControllerFactory = () => new AbortController(),
  ) {}

  /** Request matches for the given state; any older request is aborted. */
  async update(state: ExplorerState): Promise<void> {
    if (this.inflight) this.inflight.abort();
    const controller = this.makeController();
    this.inflight = controller;
    const gen = ++this.generation;
    this.requestCount++;
    try {
      const result = await this.client.dryrun(state.camera, state.features, controller.signal);
      if (gen === this.generation) {
        this.inflight = null;
        this.onResult(result);
      }
    } catch (err) {
      if (controller.signal.aborted) return; // superseded, not an error
      if (gen === this.generation) {
        this.inflight = null;
        this.onError(err);
      }
    }
  }
}

/** Ids of map features highlighted as matched, keyed by photo feature. */
export function highlightedMatches(response: DryrunResponse): Map<string, string> {
  const out = new Map<string, string>();
  for (const m of response.matches) {
    if (m.matched_id !== null) out.set(m.feature, m.matched_id);
  }
  return out;
}
