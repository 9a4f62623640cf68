// Minimal .flo decoder (little-endian: f32 magic, i32 w, i32 h, then
// h*w interleaved f32 (u, v)). Used by the e2e checks to compare previewed
// flow values against CLI output, and available to overlays.

export interface FlowGrid {
  width: number;
  height: number;
  /** interleaved (u, v), row-major, length 2*w*h */
  data: Float32Array;
}

export const FLO_MAGIC = 202021.25;

export function decodeFlo(bytes: Uint8Array): FlowGrid {
  if (bytes.byteLength < 12) throw new Error("flo: too short");
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const magic = view.getFloat32(0, true);
  if (Math.fround(magic) !== Math.fround(FLO_MAGIC)) {
    throw new Error(`flo: bad magic ${magic}`);
  }
  const width = view.getInt32(4, true);
  const height = view.getInt32(8, true);
  const count = width * height * 2;
  if (bytes.byteLength !== 12 + 4 * count) {
    throw new Error(`flo: expected ${12 + 4 * count} bytes, got ${bytes.byteLength}`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) data[i] = view.getFloat32(12 + 4 * i, true);
  return { width, height, data };
}

export function flowAt(grid: FlowGrid, x: number, y: number): [number, number] {
  const base = 2 * (y * grid.width + x);
  return [grid.data[base], grid.data[base + 1]];
}

export function base64ToBytes(b64: string): Uint8Array {
  if (typeof Buffer !== "undefined") {
    return new Uint8Array(Buffer.from(b64, "base64"));
  }
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}
