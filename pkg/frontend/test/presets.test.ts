import { describe, expect, it } from "vitest";

import { buildPreset, cameraCenter, PRESET_NAMES } from "../src/presets.js";

function matmulT(r: number[]): number[] {
  // R^T R, row-major 3x3
  const out = new Array(9).fill(0);
  for (let i = 0; i < 3; i++)
    for (let j = 0; j < 3; j++)
      for (let k = 0; k < 3; k++) out[3 * i + j] += r[3 * k + i] * r[3 * k + j];
  return out;
}

function det3(r: number[]): number {
  return (
    r[0] * (r[4] * r[8] - r[5] * r[7]) -
    r[1] * (r[3] * r[8] - r[5] * r[6]) +
    r[2] * (r[3] * r[7] - r[4] * r[6])
  );
}

describe("camera presets", () => {
  it("every non-none preset yields orthonormal right-handed rotations", () => {
    for (const name of PRESET_NAMES) {
      const traj = buildPreset(name, 256, 192, 6, { speed: 0.1, radius: 8, angularSpeed: 0.05 });
      if (name === "none") {
        expect(traj).toBeNull();
        continue;
      }
      expect(traj!.frames).toHaveLength(6);
      for (const f of traj!.frames) {
        const gram = matmulT(f.R);
        for (let i = 0; i < 3; i++)
          for (let j = 0; j < 3; j++)
            expect(Math.abs(gram[3 * i + j] - (i === j ? 1 : 0))).toBeLessThan(1e-9);
        expect(det3(f.R)).toBeCloseTo(1, 9);
        expect(f.fx).toBeGreaterThan(0);
      }
    }
  });

  it("pan presets move the camera center linearly along x", () => {
    const traj = buildPreset("pan-right", 128, 128, 4, { speed: 0.25 })!;
    const centers = traj.frames.map(cameraCenter);
    for (let i = 0; i < 4; i++) {
      expect(centers[i][0]).toBeCloseTo(0.25 * i, 9);
      expect(centers[i][1]).toBeCloseTo(0, 9);
      expect(centers[i][2]).toBeCloseTo(0, 9);
    }
    const left = buildPreset("pan-left", 128, 128, 4, { speed: 0.25 })!;
    expect(cameraCenter(left.frames[3])[0]).toBeCloseTo(-0.75, 9);
  });

  it("zoom presets move the camera center along z only", () => {
    const traj = buildPreset("zoom-in", 128, 128, 3, { speed: 0.5 })!;
    const c = cameraCenter(traj.frames[2]);
    expect(c[0]).toBeCloseTo(0, 9);
    expect(c[2]).toBeCloseTo(1.0, 9);
  });

  it("orbit keeps the camera at a fixed distance from the pivot", () => {
    const radius = 7;
    const traj = buildPreset("orbit", 128, 128, 8, { radius, angularSpeed: 0.2 })!;
    for (const f of traj.frames) {
      const c = cameraCenter(f);
      const d = Math.hypot(c[0], c[1], c[2] - radius);
      expect(d).toBeCloseTo(radius, 9);
    }
    // frame 0 is the untouched reference pose
    expect(cameraCenter(traj.frames[0])).toEqual([0, 0, 0]);
  });

  it("frame 0 of every preset is the identity pose", () => {
    for (const name of PRESET_NAMES.filter((n) => n !== "none")) {
      const traj = buildPreset(name, 64, 64, 3)!;
      expect(traj.frames[0].R).toEqual([1, 0, 0, 0, 1, 0, 0, 0, 1]);
      const c = cameraCenter(traj.frames[0]);
      expect(Math.hypot(c[0], c[1], c[2])).toBeCloseTo(0, 12);
    }
  });
});
