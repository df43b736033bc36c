// Explorer wiring: overview panel (coarse reference + ROI picking) on the
// left, live detail panel (shaded surface, proxy/HIP/force) on the right.

import { SessionClient } from "./client.js";
import { fitToCubeScale, mappedExtents } from "./mapping.js";
import type { DepthGrid } from "./mhdf.js";
import { PointerSteering } from "./pointer.js";
import type { RoiWindow } from "./protocol.js";
import { renderOverview, renderScene } from "./render.js";
import { RoiPicker } from "./roi.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const base = window.location.origin.startsWith("http")
    ? window.location.origin
    : "http://127.0.0.1:8077";
  const client = new SessionClient(base);
  const status = el<HTMLDivElement>("status");
  const forceOut = el<HTMLDivElement>("force-readout");
  const levelOut = el<HTMLSpanElement>("level-indicator");
  const overview = el<HTMLCanvasElement>("overview");
  const detail = el<HTMLCanvasElement>("detail");
  const assetSelect = el<HTMLSelectElement>("asset-select");
  const octx = overview.getContext("2d")!;
  const dctx = detail.getContext("2d")!;

  const assets = await client.listAssets();
  for (const a of assets) {
    const opt = document.createElement("option");
    opt.value = a.id;
    opt.textContent = `${a.name} (${a.width}x${a.height})`;
    assetSelect.appendChild(opt);
  }

  let session = await client.openSession(assets[0].id);
  let assetId = assets[0].id;
  const levelGrids = new Map<number, DepthGrid>();
  let overviewGrid: DepthGrid | null = null;
  let detailGrid: DepthGrid | null = null;
  let currentRoi: RoiWindow = session.roi;

  async function loadLevel(level: number): Promise<DepthGrid> {
    let grid = levelGrids.get(level);
    if (!grid) {
      grid = await client.fetchGrid(assetId, level);
      levelGrids.set(level, grid);
    }
    return grid;
  }

  async function refreshGrids(roi: RoiWindow): Promise<void> {
    detailGrid = await loadLevel(roi.level);
    overviewGrid = await loadLevel(session.asset.levels - 1);
  }

  await client.connect(session.session_id);
  await refreshGrids(session.roi);

  const steering = new PointerSteering(
    client,
    {
      canvasW: detail.width,
      canvasH: detail.height,
      extentX: session.workspace_extent,
      extentY: session.workspace_extent,
    },
    session.workspace_extent, // start well above the surface
    1000 / session.snapshot_hz
  );
  steering.attach(detail);

  const picker = new RoiPicker(
    client,
    () => currentRoi.level,
    () => (detailGrid ? { w: detailGrid.width, h: detailGrid.height } : null)
  );
  picker.attach(overview);

  el<HTMLButtonElement>("level-up").addEventListener("click", () => {
    void picker.stepLevel(+1);
  });
  el<HTMLButtonElement>("level-down").addEventListener("click", () => {
    void picker.stepLevel(-1);
  });

  assetSelect.addEventListener("change", async () => {
    client.close();
    assetId = assetSelect.value;
    levelGrids.clear();
    session = await client.openSession(assetId);
    currentRoi = session.roi;
    await client.connect(session.session_id);
    await refreshGrids(session.roi);
  });

  function frame(): void {
    const view = client.store.view;
    const snap = view.snapshot;
    if (snap && (snap.roi.level !== currentRoi.level || snap.roi.x !== currentRoi.x ||
        snap.roi.y !== currentRoi.y || snap.roi.w !== currentRoi.w ||
        snap.roi.h !== currentRoi.h)) {
      currentRoi = snap.roi;
      void refreshGrids(currentRoi);
    }
    steering.flush();

    renderOverview(octx, overviewGrid, view.ackedRoi);
    if (picker.drag) {
      octx.strokeStyle = "#ffd37a";
      octx.setLineDash([4, 3]);
      octx.strokeRect(
        picker.drag.x0,
        picker.drag.y0,
        picker.drag.x1 - picker.drag.x0,
        picker.drag.y1 - picker.drag.y0
      );
      octx.setLineDash([]);
    }
    renderScene(dctx, detailGrid, snap, {
      window: currentRoi,
      workspaceExtent: session.workspace_extent,
    });

    if (snap) {
      const mag = view.forceReadoutN;
      const arrow = snap.in_contact ? "▲" : "·";
      forceOut.textContent = `force ${mag.toFixed(3)} N ${arrow}${
        snap.converged ? "" : "  (jerky contact)"
      }`;
      forceOut.className = snap.in_contact ? "force on" : "force";
      const scale = detailGrid
        ? fitToCubeScale(currentRoi.w, currentRoi.h, detailGrid.spacing, session.workspace_extent)
        : 0;
      const [ex, ey] = detailGrid
        ? mappedExtents(currentRoi, detailGrid.spacing, session.workspace_extent)
        : [0, 0];
      levelOut.textContent =
        `level ${currentRoi.level} | window ${currentRoi.w}x${currentRoi.h} nodes | ` +
        `scale ${scale.toFixed(3)} ws-mm/model-mm | ${ex.toFixed(0)}x${ey.toFixed(0)} mm | ` +
        `tick p99 ${snap.tick_p99_us.toFixed(0)} us`;
      status.textContent = picker.hint ?? view.lastError ?? (steering.clampedCue ? "edge of workspace" : "");
    }
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

void boot().catch((err) => {
  const status = document.getElementById("status");
  if (status) status.textContent = `failed to start: ${err}`;
});
