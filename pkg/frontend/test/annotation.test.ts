import { describe, expect, it } from "vitest";

import {
  downsamplePath,
  exportAnnotation,
  importAnnotation,
  MAX_POINTS,
  pathLength,
  SessionModel,
} from "../src/annotation.js";
import type { Point } from "../src/types.js";

function drag(session: SessionModel, points: Point[]) {
  session.beginDrag(points[0]);
  for (const p of points.slice(1, -1)) session.extendDrag(p);
  return session.endDrag(points[points.length - 1]);
}

describe("drag capture", () => {
  it("keeps press and release endpoints", () => {
    const s = new SessionModel(200, 150);
    const path = drag(s, [
      [10, 10],
      [60, 40],
      [110, 10],
    ]);
    expect(path).not.toBeNull();
    expect(path![0]).toEqual([10, 10]);
    expect(path![path!.length - 1]).toEqual([110, 10]);
    expect(s.trajectories).toHaveLength(1);
  });

  it("discards drags shorter than 3 px", () => {
    const s = new SessionModel(200, 150);
    expect(
      drag(s, [
        [10, 10],
        [11, 10.5],
      ]),
    ).toBeNull();
    expect(s.trajectories).toHaveLength(0);
  });

  it("downsamples long paths to at most 64 points, endpoints intact", () => {
    const long: Point[] = [];
    for (let i = 0; i < 500; i++) long.push([i / 4, 10 + Math.sin(i / 20)]);
    const down = downsamplePath(long);
    expect(down.length).toBe(MAX_POINTS);
    expect(down[0]).toEqual(long[0]);
    expect(down[down.length - 1]).toEqual(long[long.length - 1]);
    // order along the original path is preserved
    for (let i = 1; i < down.length; i++) {
      expect(down[i][0]).toBeGreaterThanOrEqual(down[i - 1][0]);
    }
  });

  it("clamps points to the canvas", () => {
    const s = new SessionModel(100, 80);
    const path = drag(s, [
      [-5, 10],
      [150, 90],
    ]);
    expect(path).not.toBeNull();
    for (const [x, y] of s.trajectories[0]) {
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThan(100);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThan(80);
    }
  });

  it("undo removes only the last committed trajectory", () => {
    const s = new SessionModel(200, 150);
    drag(s, [
      [10, 10],
      [50, 10],
    ]);
    drag(s, [
      [20, 40],
      [80, 40],
    ]);
    expect(s.trajectories).toHaveLength(2);
    expect(s.undo()).toBe(true);
    expect(s.trajectories).toHaveLength(1);
    expect(s.trajectories[0][0]).toEqual([10, 10]);
    expect(s.undo()).toBe(true);
    expect(s.undo()).toBe(false);
  });
});

describe("export / import", () => {
  it("round-trips the annotation schema", () => {
    const s = new SessionModel(128, 96, 6);
    drag(s, [
      [5, 5],
      [25, 15],
      [40, 5],
    ]);
    const text = exportAnnotation(s);
    const parsed = JSON.parse(text);
    expect(parsed).toMatchObject({ width: 128, height: 96, num_frames: 6 });
    expect(parsed.trajectories).toHaveLength(1);

    const restored = new SessionModel(128, 96);
    importAnnotation(restored, text);
    expect(restored.numFrames).toBe(6);
    expect(restored.trajectories).toEqual(s.trajectories);
  });

  it("empty session exports a valid empty annotation", () => {
    const s = new SessionModel(64, 64, 4);
    const parsed = JSON.parse(exportAnnotation(s));
    expect(parsed.trajectories).toEqual([]);
    const restored = new SessionModel(64, 64);
    importAnnotation(restored, exportAnnotation(s));
    expect(restored.trajectories).toEqual([]);
  });

  it("rejects foreign-sized annotations and junk", () => {
    const s = new SessionModel(64, 64);
    expect(() =>
      importAnnotation(s, JSON.stringify({ width: 32, height: 64, num_frames: 4, trajectories: [] })),
    ).toThrow(/32x64/);
    expect(() => importAnnotation(s, '{"nope": 1}')).toThrow(/not an annotation/);
  });
});

describe("path length", () => {
  it("sums segment lengths", () => {
    expect(
      pathLength([
        [0, 0],
        [3, 4],
        [3, 10],
      ]),
    ).toBeCloseTo(11, 12);
  });
});
