// Canvas painter for the two panels: an isometric shaded height field with
// the proxy ball (blue; amber when the solver reports jerk), the HIP ball
// (red), the spring segment between them, and a force arrow at the proxy.
// Dependency-free on purpose: tsc is the whole build.

import type { DepthGrid } from "./mhdf.js";
import type { RoiWindow, Snapshot } from "./protocol.js";
import { fitToCubeScale, windowToOutline } from "./mapping.js";

export interface Camera {
  ux: number; // px per node along the x-diagonal
  uy: number; // px per node along the y-diagonal
  uz: number; // px per mm of height
  cx: number;
  cy: number;
}

export function fitCamera(
  canvasW: number,
  canvasH: number,
  nodesW: number,
  nodesH: number,
  zRange: number
): Camera {
  const span = nodesW + nodesH;
  const ux = (0.92 * canvasW) / span;
  const uy = (0.55 * canvasH) / span;
  const uz = zRange > 0 ? (0.25 * canvasH) / zRange : 1;
  return {
    ux,
    uy,
    uz,
    cx: canvasW / 2 + ((nodesH - nodesW) * ux) / 2,
    cy: canvasH * 0.32,
  };
}

export function project(cam: Camera, i: number, j: number, z: number): [number, number] {
  return [cam.cx + (i - j) * cam.ux, cam.cy + (i + j) * cam.uy - z * cam.uz];
}

const LIGHT = normalize([-0.4, 0.55, 0.73]);

function normalize(v: [number, number, number]): [number, number, number] {
  const n = Math.hypot(v[0], v[1], v[2]) || 1;
  return [v[0] / n, v[1] / n, v[2] / n];
}

function shade(
  dzdi: number,
  dzdj: number,
  base: [number, number, number]
): string {
  const n = normalize([-dzdi, -dzdj, 1]);
  const lit = Math.max(0.25, n[0] * LIGHT[0] + n[1] * LIGHT[1] + n[2] * LIGHT[2]);
  return `rgb(${Math.round(base[0] * lit)},${Math.round(base[1] * lit)},${Math.round(
    base[2] * lit
  )})`;
}

export interface SceneOptions {
  window?: RoiWindow; // sub-rectangle of the grid to draw (detail panel)
  workspaceExtent?: number; // needed to place workspace-space markers
  maxCells?: number; // decimation cap for big grids
}

function drawPlaceholder(ctx: CanvasRenderingContext2D, w: number, h: number): void {
  ctx.fillStyle = "#181c22";
  ctx.fillRect(0, 0, w, h);
  ctx.fillStyle = "#8a93a3";
  ctx.font = "14px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("loading surface…", w / 2, h / 2);
}

/** Shaded height field plus live markers; everything comes from the snapshot. */
export function renderScene(
  ctx: CanvasRenderingContext2D,
  grid: DepthGrid | null,
  snapshot: Snapshot | null,
  opts: SceneOptions = {}
): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  if (!grid) {
    drawPlaceholder(ctx, w, h);
    return;
  }
  const win = opts.window ?? { level: 0, x: 0, y: 0, w: grid.width, h: grid.height };
  const maxCells = opts.maxCells ?? 96;
  const stride = Math.max(1, Math.ceil(Math.max(win.w, win.h) / maxCells));

  let zMin = Infinity;
  let zMax = -Infinity;
  for (let j = 0; j < win.h; j += stride) {
    for (let i = 0; i < win.w; i += stride) {
      const z = grid.values[(win.y + j) * grid.width + (win.x + i)];
      if (z < zMin) zMin = z;
      if (z > zMax) zMax = z;
    }
  }
  const zRange = Math.max(zMax - zMin, 1e-6);
  const nw = Math.floor((win.w - 1) / stride);
  const nh = Math.floor((win.h - 1) / stride);
  const cam = fitCamera(w, h, nw + 1, nh + 1, zRange);

  ctx.fillStyle = "#181c22";
  ctx.fillRect(0, 0, w, h);

  const zAt = (ci: number, cj: number) =>
    grid.values[(win.y + cj * stride) * grid.width + (win.x + ci * stride)] - zMin;
  const holeAt = (ci: number, cj: number) =>
    grid.holes[(win.y + cj * stride) * grid.width + (win.x + ci * stride)] === 1;

  // back-to-front over the diagonal keeps nearer quads painted last
  for (let s = 0; s <= nw + nh - 2; s++) {
    for (let ci = Math.max(0, s - nh + 1); ci <= Math.min(s, nw - 1); ci++) {
      const cj = s - ci;
      const z00 = zAt(ci, cj);
      const z10 = zAt(ci + 1, cj);
      const z01 = zAt(ci, cj + 1);
      const z11 = zAt(ci + 1, cj + 1);
      const p00 = project(cam, ci, cj, z00);
      const p10 = project(cam, ci + 1, cj, z10);
      const p11 = project(cam, ci + 1, cj + 1, z11);
      const p01 = project(cam, ci, cj + 1, z01);
      const hole =
        holeAt(ci, cj) && holeAt(ci + 1, cj) && holeAt(ci, cj + 1) && holeAt(ci + 1, cj + 1);
      const base: [number, number, number] = hole ? [96, 78, 60] : [92, 130, 168];
      ctx.fillStyle = shade(
        (z10 - z00 + z11 - z01) / (2 * stride),
        (z01 - z00 + z11 - z10) / (2 * stride),
        base
      );
      ctx.beginPath();
      ctx.moveTo(p00[0], p00[1]);
      ctx.lineTo(p10[0], p10[1]);
      ctx.lineTo(p11[0], p11[1]);
      ctx.lineTo(p01[0], p01[1]);
      ctx.closePath();
      ctx.fill();
    }
  }

  if (!snapshot || opts.workspaceExtent === undefined) return;

  // workspace mm -> node coordinates of the drawn window
  const scale = fitToCubeScale(win.w, win.h, grid.spacing, opts.workspaceExtent);
  const toNode = (p: [number, number, number]): [number, number, number] => [
    p[0] / (scale * grid.spacing) / stride,
    p[1] / (scale * grid.spacing) / stride,
    p[2] / scale - zMin,
  ];
  const proxyN = toNode(snapshot.proxy);
  const hipN = toNode(snapshot.hip);
  const proxyPx = project(cam, proxyN[0], proxyN[1], proxyN[2]);
  const hipPx = project(cam, hipN[0], hipN[1], hipN[2]);

  ctx.strokeStyle = "#d8dee9";
  ctx.lineWidth = 1.2;
  ctx.beginPath();
  ctx.moveTo(proxyPx[0], proxyPx[1]);
  ctx.lineTo(hipPx[0], hipPx[1]);
  ctx.stroke();

  ctx.fillStyle = "#e05555";
  ctx.beginPath();
  ctx.arc(hipPx[0], hipPx[1], 5, 0, 2 * Math.PI);
  ctx.fill();

  ctx.fillStyle = snapshot.converged ? "#4f8fe8" : "#e0a43c";
  ctx.beginPath();
  ctx.arc(proxyPx[0], proxyPx[1], 6, 0, 2 * Math.PI);
  ctx.fill();

  const fMag = Math.hypot(...snapshot.force);
  if (fMag > 1e-9) {
    const dir = normalize(snapshot.force);
    const lenPx = Math.min(70, 18 + 40 * fMag);
    const tip: [number, number] = [
      proxyPx[0] + dir[0] * lenPx,
      proxyPx[1] - dir[2] * lenPx - dir[1] * lenPx * 0.4,
    ];
    ctx.strokeStyle = "#7fe07f";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(proxyPx[0], proxyPx[1]);
    ctx.lineTo(tip[0], tip[1]);
    ctx.stroke();
    ctx.fillStyle = "#7fe07f";
    ctx.beginPath();
    ctx.arc(tip[0], tip[1], 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

/** Top-down overview with the acked ROI window outlined. */
export function renderOverview(
  ctx: CanvasRenderingContext2D,
  grid: DepthGrid | null,
  ackedRoi: RoiWindow | null
): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  if (!grid) {
    drawPlaceholder(ctx, w, h);
    return;
  }
  let zMin = Infinity;
  let zMax = -Infinity;
  for (let k = 0; k < grid.values.length; k++) {
    const z = grid.values[k];
    if (z < zMin) zMin = z;
    if (z > zMax) zMax = z;
  }
  const range = Math.max(zMax - zMin, 1e-6);
  const img = ctx.createImageData(w, h);
  for (let py = 0; py < h; py++) {
    const j = Math.min(grid.height - 1, Math.round((1 - py / (h - 1)) * (grid.height - 1)));
    for (let px = 0; px < w; px++) {
      const i = Math.min(grid.width - 1, Math.round((px / (w - 1)) * (grid.width - 1)));
      const idx = j * grid.width + i;
      const t = (grid.values[idx] - zMin) / range;
      const o = 4 * (py * w + px);
      if (grid.holes[idx]) {
        img.data[o] = 84;
        img.data[o + 1] = 64;
        img.data[o + 2] = 48;
      } else {
        img.data[o] = 30 + 130 * t;
        img.data[o + 1] = 45 + 150 * t;
        img.data[o + 2] = 70 + 160 * t;
      }
      img.data[o + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
  if (ackedRoi) {
    const r = windowToOutline(ackedRoi, w, h, grid.width, grid.height);
    ctx.strokeStyle = "#ff7ab8";
    ctx.lineWidth = 2;
    ctx.strokeRect(r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0);
  }
}
