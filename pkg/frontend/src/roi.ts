// ROI picking on the overview panel: drag a rectangle to zoom the detail
// panel into that window; +/- steps the pyramid level. The outline always
// shows the server-acked selection, never the optimistic one.

import type { SessionClient } from "./client.js";
import { dragToWindow, type DragRect } from "./mapping.js";

export class RoiPicker {
  drag: DragRect | null = null;
  hint: string | null = null;

  constructor(
    private client: SessionClient,
    private levelOf: () => number,
    private gridDims: () => { w: number; h: number } | null
  ) {}

  attach(canvas: HTMLCanvasElement): void {
    canvas.addEventListener("pointerdown", (ev) => {
      this.drag = { x0: ev.offsetX, y0: ev.offsetY, x1: ev.offsetX, y1: ev.offsetY };
      canvas.setPointerCapture(ev.pointerId);
    });
    canvas.addEventListener("pointermove", (ev) => {
      if (this.drag) {
        this.drag.x1 = ev.offsetX;
        this.drag.y1 = ev.offsetY;
      }
    });
    canvas.addEventListener("pointerup", () => {
      const rect = this.drag;
      this.drag = null;
      const dims = this.gridDims();
      if (!rect || !dims) return;
      const win = dragToWindow(
        rect,
        canvas.width,
        canvas.height,
        this.levelOf(),
        dims.w,
        dims.h
      );
      if (!win) {
        this.hint = "selection too small (needs at least 2x2 nodes)";
        return;
      }
      this.hint = null;
      void this.client
        .setRoi(win)
        .then((ack) => {
          if (!ack.accepted) this.hint = ack.reason ?? "selection rejected";
        })
        .catch((err: Error) => {
          this.hint = err.message;
        });
    });
  }

  stepLevel(delta: number): Promise<boolean> {
    return this.client
      .setLevel(delta)
      .then((ack) => ack.accepted)
      .catch(() => false);
  }
}
