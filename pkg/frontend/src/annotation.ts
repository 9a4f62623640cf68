// Drag capture model: pointer paths become committed trajectories with the
// exact schema the engine consumes. Pure logic, no DOM, so it is testable
// headlessly; app.ts feeds it pointer events.

import type { AnnotationSetJson, Point } from "./types.js";

export const MAX_POINTS = 64;
export const MIN_DRAG_PX = 3;

export function pathLength(points: Point[]): number {
  let total = 0;
  for (let i = 1; i < points.length; i++) {
    total += Math.hypot(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1]);
  }
  return total;
}

/** Downsample a pointer path to at most MAX_POINTS, keeping both endpoints. */
export function downsamplePath(points: Point[], maxPoints = MAX_POINTS): Point[] {
  if (points.length <= maxPoints) return points.slice();
  const out: Point[] = [];
  for (let i = 0; i < maxPoints; i++) {
    const src = Math.round((i * (points.length - 1)) / (maxPoints - 1));
    out.push(points[src]);
  }
  return out;
}

export class SessionModel {
  readonly width: number;
  readonly height: number;
  numFrames: number;
  private committed: Point[][] = [];
  private active: Point[] | null = null;

  constructor(width: number, height: number, numFrames = 8) {
    this.width = width;
    this.height = height;
    this.numFrames = numFrames;
  }

  private clamp(p: Point): Point {
    // annotation points must stay inside [0, W) x [0, H)
    return [
      Math.min(Math.max(p[0], 0), this.width - 1e-3),
      Math.min(Math.max(p[1], 0), this.height - 1e-3),
    ];
  }

  beginDrag(p: Point): void {
    this.active = [this.clamp(p)];
  }

  extendDrag(p: Point): void {
    if (this.active) this.active.push(this.clamp(p));
  }

  /** Finish the active drag; returns the committed trajectory or null if discarded. */
  endDrag(p: Point | null = null): Point[] | null {
    if (!this.active) return null;
    if (p) this.active.push(this.clamp(p));
    const path = downsamplePath(this.active);
    this.active = null;
    if (path.length < 2 || pathLength(path) < MIN_DRAG_PX) {
      return null; // too short to mean anything; caller shows a hint
    }
    this.committed.push(path);
    return path;
  }

  /** Undo removes the last committed trajectory only. */
  undo(): boolean {
    return this.committed.pop() !== undefined;
  }

  clear(): void {
    this.committed = [];
    this.active = null;
  }

  get trajectories(): Point[][] {
    return this.committed.map((t) => t.map((p) => [p[0], p[1]] as Point));
  }

  get activePath(): Point[] | null {
    return this.active ? this.active.slice() : null;
  }

  toAnnotation(): AnnotationSetJson {
    return {
      width: this.width,
      height: this.height,
      num_frames: this.numFrames,
      trajectories: this.trajectories,
    };
  }

  /** Restore trajectories from an exported annotation; dims must match. */
  loadAnnotation(ann: AnnotationSetJson): void {
    if (ann.width !== this.width || ann.height !== this.height) {
      throw new Error(
        `annotation is ${ann.width}x${ann.height}, canvas is ${this.width}x${this.height}`,
      );
    }
    this.numFrames = ann.num_frames;
    this.committed = ann.trajectories.map((t) => t.map((p) => [p[0], p[1]] as Point));
  }
}

export function exportAnnotation(session: SessionModel): string {
  return JSON.stringify(session.toAnnotation(), null, 2) + "\n";
}

export function importAnnotation(session: SessionModel, text: string): void {
  const parsed = JSON.parse(text) as AnnotationSetJson;
  if (
    typeof parsed.width !== "number" ||
    typeof parsed.height !== "number" ||
    typeof parsed.num_frames !== "number" ||
    !Array.isArray(parsed.trajectories)
  ) {
    throw new Error("not an annotation file");
  }
  session.loadAnnotation(parsed);
}
