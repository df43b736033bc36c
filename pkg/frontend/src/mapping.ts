// View-model geometry shared by the panels: fit-to-cube scaling, pointer to
// workspace coordinates, and drag rectangles to ROI node windows. Pure
// functions, mirrored against the service's mapping in the tests.

import type { RoiWindow } from "./protocol.js";

/** Workspace mm per model mm when a window is fitted into the cube. */
export function fitToCubeScale(
  nodesW: number,
  nodesH: number,
  spacing: number,
  workspaceExtent: number
): number {
  const span = Math.max((nodesW - 1) * spacing, (nodesH - 1) * spacing);
  if (span <= 0) throw new Error("window must span at least two nodes");
  return workspaceExtent / span;
}

/** Lateral workspace extents of a mapped window (x, y) in mm. */
export function mappedExtents(
  roi: RoiWindow,
  spacing: number,
  workspaceExtent: number
): [number, number] {
  const scale = fitToCubeScale(roi.w, roi.h, spacing, workspaceExtent);
  return [(roi.w - 1) * spacing * scale, (roi.h - 1) * spacing * scale];
}

export interface PointerMap {
  canvasW: number;
  canvasH: number;
  extentX: number; // workspace mm covered by the canvas
  extentY: number;
}

export interface HipTarget {
  x: number;
  y: number;
  clamped: boolean;
}

/** Canvas pixel -> lateral workspace position, clamped with a cue flag. */
export function pointerToWorkspace(px: number, py: number, map: PointerMap): HipTarget {
  let x = (px / map.canvasW) * map.extentX;
  let y = (1 - py / map.canvasH) * map.extentY;
  let clamped = false;
  if (x < 0) {
    x = 0;
    clamped = true;
  } else if (x > map.extentX) {
    x = map.extentX;
    clamped = true;
  }
  if (y < 0) {
    y = 0;
    clamped = true;
  } else if (y > map.extentY) {
    y = map.extentY;
    clamped = true;
  }
  return { x, y, clamped };
}

/** Wheel steps -> z adjustment in mm (scroll down pushes into the surface). */
export function wheelToDepthStep(deltaY: number, stepMm = 0.5): number {
  return deltaY > 0 ? -stepMm : stepMm;
}

export interface DragRect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/**
 * Overview drag rectangle (canvas px) -> node window on the displayed level.
 * Returns null for degenerate selections (< 2x2 nodes).
 */
export function dragToWindow(
  rect: DragRect,
  canvasW: number,
  canvasH: number,
  level: number,
  gridW: number,
  gridH: number
): RoiWindow | null {
  const xMin = Math.min(rect.x0, rect.x1);
  const xMax = Math.max(rect.x0, rect.x1);
  const yMin = Math.min(rect.y0, rect.y1);
  const yMax = Math.max(rect.y0, rect.y1);
  // accidental micro-drags must not snap outward into a fake 2x2 window
  if (
    ((xMax - xMin) / canvasW) * (gridW - 1) < 1 ||
    ((yMax - yMin) / canvasH) * (gridH - 1) < 1
  ) {
    return null;
  }
  // canvas y grows downward, node y grows upward
  let nx0 = Math.floor((xMin / canvasW) * (gridW - 1));
  let nx1 = Math.ceil((xMax / canvasW) * (gridW - 1));
  let ny0 = Math.floor((1 - yMax / canvasH) * (gridH - 1));
  let ny1 = Math.ceil((1 - yMin / canvasH) * (gridH - 1));
  nx0 = Math.max(0, Math.min(nx0, gridW - 1));
  nx1 = Math.max(0, Math.min(nx1, gridW - 1));
  ny0 = Math.max(0, Math.min(ny0, gridH - 1));
  ny1 = Math.max(0, Math.min(ny1, gridH - 1));
  const w = nx1 - nx0 + 1;
  const h = ny1 - ny0 + 1;
  if (w < 2 || h < 2) return null;
  return { level, x: nx0, y: ny0, w, h };
}

/** Node window -> outline rectangle on the overview canvas (px). */
export function windowToOutline(
  roi: RoiWindow,
  canvasW: number,
  canvasH: number,
  gridW: number,
  gridH: number
): DragRect {
  const x0 = (roi.x / (gridW - 1)) * canvasW;
  const x1 = ((roi.x + roi.w - 1) / (gridW - 1)) * canvasW;
  const y0 = (1 - (roi.y + roi.h - 1) / (gridH - 1)) * canvasH;
  const y1 = (1 - roi.y / (gridH - 1)) * canvasH;
  return { x0, y0, x1, y1 };
}
