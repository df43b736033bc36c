import { describe, expect, it } from "vitest";

import {
  dragToWindow,
  fitToCubeScale,
  mappedExtents,
  pointerToWorkspace,
  wheelToDepthStep,
  windowToOutline,
} from "../src/mapping.js";

describe("fitToCubeScale", () => {
  it("matches the 200-node window example", () => {
    // 200x200 nodes at 1 mm into the 101.6 mm cube
    expect(fitToCubeScale(200, 200, 1.0, 101.6)).toBeCloseTo(101.6 / 199.0, 12);
  });

  it("uses the larger lateral extent", () => {
    const s = fitToCubeScale(120, 60, 1.0, 101.6);
    expect((120 - 1) * s).toBeCloseTo(101.6, 9);
  });

  it("quarter window doubles the scale", () => {
    const full = fitToCubeScale(129, 129, 1.0, 101.6);
    const quarter = fitToCubeScale(65, 65, 1.0, 101.6);
    expect(quarter / full).toBeCloseTo(2.0, 2);
  });

  it("rejects degenerate windows", () => {
    expect(() => fitToCubeScale(1, 1, 1.0, 101.6)).toThrow();
  });
});

describe("mappedExtents", () => {
  it("larger side spans the whole cube", () => {
    const [ex, ey] = mappedExtents({ level: 0, x: 0, y: 0, w: 101, h: 51 }, 1.0, 101.6);
    expect(ex).toBeCloseTo(101.6, 9);
    expect(ey).toBeLessThan(101.6);
  });
});

describe("pointerToWorkspace", () => {
  const map = { canvasW: 500, canvasH: 400, extentX: 101.6, extentY: 101.6 };

  it("maps corners", () => {
    expect(pointerToWorkspace(0, 400, map)).toEqual({ x: 0, y: 0, clamped: false });
    const t = pointerToWorkspace(500, 0, map);
    expect(t.x).toBeCloseTo(101.6);
    expect(t.y).toBeCloseTo(101.6);
  });

  it("canvas y is flipped", () => {
    const t = pointerToWorkspace(250, 100, map);
    expect(t.y).toBeCloseTo(101.6 * 0.75);
  });

  it("clamps outside with a cue", () => {
    const t = pointerToWorkspace(-10, 500, map);
    expect(t).toEqual({ x: 0, y: 0, clamped: true });
  });
});

describe("wheelToDepthStep", () => {
  it("scroll down presses into the surface", () => {
    expect(wheelToDepthStep(120)).toBeLessThan(0);
    expect(wheelToDepthStep(-120)).toBeGreaterThan(0);
  });
});

describe("dragToWindow", () => {
  it("full-canvas drag selects the whole grid", () => {
    const win = dragToWindow({ x0: 0, y0: 0, x1: 400, y1: 400 }, 400, 400, 2, 65, 65);
    expect(win).toEqual({ level: 2, x: 0, y: 0, w: 65, h: 65 });
  });

  it("degenerate drags are rejected", () => {
    expect(dragToWindow({ x0: 10, y0: 10, x1: 11, y1: 11 }, 400, 400, 0, 65, 65)).toBeNull();
  });

  it("round-trips through the outline", () => {
    const win = dragToWindow({ x0: 100, y0: 100, x1: 300, y1: 280 }, 400, 400, 1, 129, 129);
    expect(win).not.toBeNull();
    const r = windowToOutline(win!, 400, 400, 129, 129);
    expect(Math.min(r.x0, r.x1)).toBeLessThanOrEqual(100);
    expect(Math.max(r.x0, r.x1)).toBeGreaterThanOrEqual(300);
    expect(Math.min(r.y0, r.y1)).toBeLessThanOrEqual(100);
    expect(Math.max(r.y0, r.y1)).toBeGreaterThanOrEqual(280);
  });
});
