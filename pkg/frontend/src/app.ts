// Studio wiring: canvas drawing, presets, debounced previews, export/import.
// All flow math happens server-side; this file only captures input and
// renders whatever the service returns.

import { exportAnnotation, importAnnotation, SessionModel } from "./annotation.js";
import { DEBOUNCE_MS, PreviewClient, ServiceError } from "./client.js";
import { buildPreset, PRESET_NAMES } from "./presets.js";
import type { Point, PresetName, PreviewRequest } from "./types.js";

const CANVAS_W = 256;
const CANVAS_H = 192;
const MAX_MAGNITUDE = 32;

const serviceUrl =
  new URLSearchParams(window.location.search).get("service") ?? window.location.origin;

const session = new SessionModel(CANVAS_W, CANVAS_H, 8);
const client = new PreviewClient(serviceUrl, fetch.bind(window), DEBOUNCE_MS);

let preset: PresetName = "none";
let mode: "add" | "chain" = "add";
let stabilization = "identity";
let referenceImageB64: string | null = null;

// ---------------------------------------------------------------------------
// DOM scaffold
// ---------------------------------------------------------------------------

document.body.innerHTML = `
  <h1>uniflow studio</h1>
  <div id="status"></div>
  <div id="main">
    <div id="left">
      <canvas id="board" width="${CANVAS_W}" height="${CANVAS_H}"></canvas>
      <div id="controls">
        <label>frames <input id="frames" type="number" min="2" max="64" value="8"></label>
        <label>preset <select id="preset"></select></label>
        <label>mode <select id="mode"><option>add</option><option>chain</option></select></label>
        <label>filter <select id="filter">
          <option>identity</option><option>dc-only</option>
          <option>lowpass:1</option><option>lowpass:2</option>
        </select></label>
        <button id="undo">undo</button>
        <button id="clear">clear</button>
        <button id="export">export</button>
        <label class="file">import <input id="import" type="file" accept=".json"></label>
        <label class="file">image <input id="image" type="file" accept="image/png"></label>
      </div>
      <div id="hint"></div>
    </div>
    <div id="right">
      <div id="stats"></div>
      <div id="strip"></div>
      <div id="warpstrip"></div>
    </div>
  </div>
`;

const board = document.getElementById("board") as HTMLCanvasElement;
const ctx = board.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const hintEl = document.getElementById("hint")!;
const statsEl = document.getElementById("stats")!;
const stripEl = document.getElementById("strip")!;
const warpEl = document.getElementById("warpstrip")!;

const presetSelect = document.getElementById("preset") as HTMLSelectElement;
for (const name of PRESET_NAMES) {
  const opt = document.createElement("option");
  opt.value = name;
  opt.textContent = name;
  presetSelect.append(opt);
}

// ---------------------------------------------------------------------------
// Board rendering (reference image + arrow overlays)
// ---------------------------------------------------------------------------

const refImage = new Image();
let refImageLoaded = false;
refImage.onload = () => {
  refImageLoaded = true;
  drawBoard();
};

function drawArrow(path: Point[], color: string) {
  if (path.length < 2) return;
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(path[0][0], path[0][1]);
  for (const [x, y] of path.slice(1)) ctx.lineTo(x, y);
  ctx.stroke();
  // arrowhead along the final segment
  const [x1, y1] = path[path.length - 1];
  const [x0, y0] = path[path.length - 2];
  const angle = Math.atan2(y1 - y0, x1 - x0);
  ctx.beginPath();
  ctx.moveTo(x1, y1);
  ctx.lineTo(x1 - 8 * Math.cos(angle - 0.4), y1 - 8 * Math.sin(angle - 0.4));
  ctx.lineTo(x1 - 8 * Math.cos(angle + 0.4), y1 - 8 * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
}

function drawBoard() {
  ctx.fillStyle = "#dfe7ef";
  ctx.fillRect(0, 0, CANVAS_W, CANVAS_H);
  if (refImageLoaded) ctx.drawImage(refImage, 0, 0, CANVAS_W, CANVAS_H);
  for (const t of session.trajectories) drawArrow(t, "#d03535");
  const active = session.activePath;
  if (active) drawArrow(active, "#3566d0");
}

// ---------------------------------------------------------------------------
// Previews
// ---------------------------------------------------------------------------

function currentRequest(): PreviewRequest {
  const camera = buildPreset(preset, CANVAS_W, CANVAS_H, session.numFrames);
  return {
    width: CANVAS_W,
    height: CANVAS_H,
    num_frames: session.numFrames,
    mode,
    annotation: session.toAnnotation(),
    camera,
    depth: camera ? { kind: "constant", value: 10 } : null,
    stabilization,
    max_magnitude: MAX_MAGNITUDE,
  };
}

function renderStrip(el: HTMLElement, pngs: string[], title: string) {
  el.innerHTML = `<h3>${title}</h3>`;
  for (const b64 of pngs) {
    const img = document.createElement("img");
    img.src = `data:image/png;base64,${b64}`;
    img.width = 128;
    el.append(img);
  }
}

async function refreshPreview() {
  statusEl.textContent = "rendering…";
  try {
    const out = await client.schedulePreview(currentRequest());
    if (out === null) return; // superseded by a newer edit
    renderStrip(stripEl, out.frames, "flow");
    const conflict =
      out.stats.conflict === null
        ? "n/a"
        : out.stats.conflict.map((v) => v.toFixed(2)).join(" ");
    const flicker = out.stats.flicker === null ? "n/a" : out.stats.flicker.toFixed(4);
    statsEl.textContent =
      `max |flow| ${out.stats.max_magnitude.toFixed(2)} px · ` +
      `flicker ${flicker} · conflict ${conflict}`;
    statusEl.textContent = "";
    if (referenceImageB64) {
      const warped = await client.previewWarp({
        ...currentRequest(),
        reference_image: referenceImageB64,
      });
      renderStrip(warpEl, warped.frames, "warped");
    }
  } catch (err) {
    if (err instanceof ServiceError) {
      statusEl.textContent = `service: ${err.message}`;
    } else {
      statusEl.textContent = "service unreachable — retry once it is up";
    }
  }
}

// ---------------------------------------------------------------------------
// Input wiring
// ---------------------------------------------------------------------------

function boardPoint(ev: PointerEvent): Point {
  const rect = board.getBoundingClientRect();
  return [ev.clientX - rect.left, ev.clientY - rect.top];
}

board.addEventListener("pointerdown", (ev) => {
  board.setPointerCapture(ev.pointerId);
  session.beginDrag(boardPoint(ev));
  drawBoard();
});
board.addEventListener("pointermove", (ev) => {
  if (session.activePath) {
    session.extendDrag(boardPoint(ev));
    drawBoard();
  }
});
board.addEventListener("pointerup", (ev) => {
  const committed = session.endDrag(boardPoint(ev));
  hintEl.textContent = committed ? "" : "drag at least 3 px to add an arrow";
  drawBoard();
  void refreshPreview();
});

(document.getElementById("frames") as HTMLInputElement).addEventListener("change", (ev) => {
  session.numFrames = Number((ev.target as HTMLInputElement).value);
  void refreshPreview();
});
presetSelect.addEventListener("change", () => {
  preset = presetSelect.value as PresetName;
  void refreshPreview();
});
(document.getElementById("mode") as HTMLSelectElement).addEventListener("change", (ev) => {
  mode = (ev.target as HTMLSelectElement).value as "add" | "chain";
  void refreshPreview();
});
(document.getElementById("filter") as HTMLSelectElement).addEventListener("change", (ev) => {
  stabilization = (ev.target as HTMLSelectElement).value;
  void refreshPreview();
});
document.getElementById("undo")!.addEventListener("click", () => {
  if (session.undo()) {
    drawBoard();
    void refreshPreview();
  }
});
document.getElementById("clear")!.addEventListener("click", () => {
  session.clear();
  drawBoard();
  void refreshPreview();
});

document.getElementById("export")!.addEventListener("click", () => {
  const blob = new Blob([exportAnnotation(session)], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "annotation.json";
  a.click();
  URL.revokeObjectURL(a.href);
});

(document.getElementById("import") as HTMLInputElement).addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  try {
    importAnnotation(session, await file.text());
    drawBoard();
    void refreshPreview();
  } catch (err) {
    hintEl.textContent = `import failed: ${(err as Error).message}`;
  }
});

(document.getElementById("image") as HTMLInputElement).addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  const bytes = new Uint8Array(await file.arrayBuffer());
  let bin = "";
  for (const b of bytes) bin += String.fromCharCode(b);
  referenceImageB64 = btoa(bin);
  refImage.src = `data:image/png;base64,${referenceImageB64}`;
  void refreshPreview();
});

// ---------------------------------------------------------------------------

drawBoard();
void client.health().then((ok) => {
  statusEl.textContent = ok ? "" : `service not reachable at ${serviceUrl}`;
});
