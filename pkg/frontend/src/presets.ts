// Parameterized camera-path generators. Users pick a preset and a couple of
// scalars instead of typing 6-DoF poses; the output is the exact trajectory
// JSON the service and CLI ingest (world-to-camera, camera center -R^T t).

import type {
  CameraFrameJson,
  CameraTrajectoryJson,
  PresetName,
  PresetParams,
} from "./types.js";

function intrinsicsFor(width: number, height: number) {
  return {
    fx: 1.2 * Math.max(width, height),
    fy: 1.2 * Math.max(width, height),
    cx: width / 2,
    cy: height / 2,
  };
}

const IDENTITY = [1, 0, 0, 0, 1, 0, 0, 0, 1];

/** Replace -0 with +0 so exported JSON and equality checks stay tidy. */
function scrubZeros(v: number[]): number[] {
  return v.map((x) => (x === 0 ? 0 : x));
}

function rotY(angle: number): number[] {
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  return scrubZeros([c, 0, s, 0, 1, 0, -s, 0, c]);
}

function applyRot(r: number[], v: number[]): number[] {
  return [
    r[0] * v[0] + r[1] * v[1] + r[2] * v[2],
    r[3] * v[0] + r[4] * v[1] + r[5] * v[2],
    r[6] * v[0] + r[7] * v[1] + r[8] * v[2],
  ];
}

function frameFromCenter(
  r: number[],
  center: number[],
  intr: ReturnType<typeof intrinsicsFor>,
): CameraFrameJson {
  // t = -R c keeps the supplied matrix world-to-camera
  const t = scrubZeros(applyRot(r, center).map((v) => -v));
  return { ...intr, R: r.slice(), t };
}

export function buildPreset(
  name: PresetName,
  width: number,
  height: number,
  numFrames: number,
  params: PresetParams = {},
): CameraTrajectoryJson | null {
  if (name === "none") return null;
  const intr = intrinsicsFor(width, height);
  const speed = params.speed ?? 0.05;
  const radius = params.radius ?? 10;
  const angular = params.angularSpeed ?? 0.01;
  const frames: CameraFrameJson[] = [];
  for (let i = 0; i < numFrames; i++) {
    switch (name) {
      case "pan-left":
        frames.push(frameFromCenter(IDENTITY.slice(), [-speed * i, 0, 0], intr));
        break;
      case "pan-right":
        frames.push(frameFromCenter(IDENTITY.slice(), [speed * i, 0, 0], intr));
        break;
      case "zoom-in":
        frames.push(frameFromCenter(IDENTITY.slice(), [0, 0, speed * i], intr));
        break;
      case "zoom-out":
        frames.push(frameFromCenter(IDENTITY.slice(), [0, 0, -speed * i], intr));
        break;
      case "orbit": {
        // circle around the look-at point (0, 0, radius), staying level
        const theta = angular * i;
        const r = rotY(-theta); // world-to-camera of a camera yawed by theta
        const center = [
          -radius * Math.sin(theta),
          0,
          radius - radius * Math.cos(theta),
        ];
        frames.push(frameFromCenter(r, center, intr));
        break;
      }
    }
  }
  return { frames };
}

/** Camera center -R^T t, handy for tests and overlays. */
export function cameraCenter(frame: CameraFrameJson): number[] {
  const r = frame.R;
  const t = frame.t;
  // R^T t
  const rt = [
    r[0] * t[0] + r[3] * t[1] + r[6] * t[2],
    r[1] * t[0] + r[4] * t[1] + r[7] * t[2],
    r[2] * t[0] + r[5] * t[1] + r[8] * t[2],
  ];
  return scrubZeros(rt.map((v) => -v));
}

export const PRESET_NAMES: PresetName[] = [
  "none",
  "pan-left",
  "pan-right",
  "zoom-in",
  "zoom-out",
  "orbit",
];
