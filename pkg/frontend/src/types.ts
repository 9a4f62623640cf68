// Wire types shared with the preview service and the CLI. The annotation
// JSON here is byte-compatible with what `uniflow drag-flow` accepts.

export type Point = [number, number];

export interface AnnotationSetJson {
  width: number;
  height: number;
  num_frames: number;
  trajectories: Point[][];
}

export interface CameraFrameJson {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  R: number[]; // 9 values, row-major, world-to-camera
  t: number[]; // 3 values
}

export interface CameraTrajectoryJson {
  frames: CameraFrameJson[];
}

export type DepthSpec =
  | { kind: "constant"; value: number }
  | { kind: "ramp"; near: number; far: number };

export type CompositionMode = "add" | "chain";

export interface PreviewRequest {
  width: number;
  height: number;
  num_frames: number;
  mode?: CompositionMode;
  annotation?: AnnotationSetJson | null;
  camera?: CameraTrajectoryJson | null;
  depth?: DepthSpec | null;
  drag_sigma?: number | null;
  stabilization?: string | null;
  max_magnitude?: number | null;
  reference_image?: string | null;
}

export interface PreviewStats {
  max_magnitude: number;
  flicker: number | null;
  conflict: number[] | null;
}

export interface FlowPreviewResponse {
  frames: string[]; // base64 PNG per flow field
  flows_flo: string[]; // base64 .flo bytes per flow field
  stats: PreviewStats;
}

export interface WarpPreviewResponse {
  frames: string[]; // base64 PNG per warped frame
}

export type PresetName =
  | "none"
  | "pan-left"
  | "pan-right"
  | "zoom-in"
  | "zoom-out"
  | "orbit";

export interface PresetParams {
  /** per-frame camera-center step in world units (pan/zoom) */
  speed?: number;
  /** orbit radius in world units (also the look-at distance) */
  radius?: number;
  /** per-frame orbit angle in radians */
  angularSpeed?: number;
}
