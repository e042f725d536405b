/** Shared types mirroring the service's REST contract. */

export interface CameraMeta {
  lat: number;
  lon: number;
  heading_deg: number;
  fov_deg?: number;
  fov_margin_deg?: number;
}

export interface PhotoFeatureSpec {
  name: string;
  /** signed degrees relative to heading, negative = left */
  angle_span: [number, number];
  /** metres, [min, max] */
  distance_range: [number, number];
  category?: string;
  description?: string;
}

export interface DryrunMatch {
  feature: string;
  matched_id: string | null;
  matched_name: string | null;
  r_norm: number;
  a_overlap: number;
}

export interface SceneFeature {
  id: string;
  name: string;
  category: string;
  distance_m: number;
  interval: [number, number];
  /** local-frame metres, camera at origin */
  polygon: [number, number][];
}

export interface DryrunResponse {
  scene_features: SceneFeature[];
  matches: DryrunMatch[];
}

export interface JobStatus {
  state: 'queued' | 'running' | 'done' | 'failed';
  progress: { stage: string; ms: number; t: number }[];
}

export interface Annotation {
  label: string;
  bounding_box: [number, number, number, number] | null;
  crop_range: [number, number, number, number] | null;
  modified: 'yes' | 'no';
  matched_feature_id: string | null;
  r_norm: string;
  description: string;
}

export interface SceneResultDoc {
  schema_version: number;
  photo_id: string;
  camera: CameraMeta;
  annotations: Annotation[];
  tour_text: string;
  unmatched: { name: string; description: string; category: string }[];
}

export interface HealthFlags {
  live: boolean;
  overpass_ok: boolean;
  provider_ok: boolean;
}

export interface ApiError {
  error_code: string;
  message: string;
}
