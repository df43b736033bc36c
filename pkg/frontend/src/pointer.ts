// Pointer steering on the detail panel: lateral drag moves the HIP in the
// workspace plane, the wheel pushes it down into / pulls it off the
// surface. Commands are throttled to the snapshot rate; the HIP holds its
// last position when the pointer leaves the canvas.

import type { SessionClient } from "./client.js";
import { pointerToWorkspace, wheelToDepthStep, type PointerMap } from "./mapping.js";

export class PointerSteering {
  private z: number;
  private lastSent = 0;
  private pending: { x: number; y: number } | null = null;
  private down = false;
  clampedCue = false;

  constructor(
    private client: SessionClient,
    private map: PointerMap,
    initialZ: number,
    private periodMs: number
  ) {
    this.z = initialZ;
  }

  get depth(): number {
    return this.z;
  }

  attach(canvas: HTMLCanvasElement): void {
    canvas.addEventListener("pointerdown", (ev) => {
      this.down = true;
      canvas.setPointerCapture(ev.pointerId);
      this.move(ev.offsetX, ev.offsetY);
    });
    canvas.addEventListener("pointermove", (ev) => {
      if (this.down) this.move(ev.offsetX, ev.offsetY);
    });
    canvas.addEventListener("pointerup", () => {
      this.down = false;
    });
    canvas.addEventListener("pointerleave", () => {
      this.pending = null; // HIP holds its last commanded position
    });
    canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.z += wheelToDepthStep(ev.deltaY);
      const at = this.pending;
      if (at) this.push(at.x, at.y);
      else this.flushDepthOnly();
    });
  }

  private move(px: number, py: number): void {
    const t = pointerToWorkspace(px, py, this.map);
    this.clampedCue = t.clamped;
    this.push(t.x, t.y);
  }

  private push(x: number, y: number): void {
    this.pending = { x, y };
    const now = Date.now();
    if (now - this.lastSent >= this.periodMs) {
      this.lastSent = now;
      void this.client.setHip(x, y, this.z).catch(() => undefined);
    }
  }

  private flushDepthOnly(): void {
    void this.client
      .setHip(this.map.extentX / 2, this.map.extentY / 2, this.z)
      .catch(() => undefined);
  }

  /** Called on each animation frame so throttled drags still land. */
  flush(): void {
    const at = this.pending;
    if (at && Date.now() - this.lastSent >= this.periodMs) {
      this.lastSent = Date.now();
      void this.client.setHip(at.x, at.y, this.z).catch(() => undefined);
    }
  }

  resetDepth(z: number): void {
    this.z = z;
  }
}
