// Session client: REST for assets/sessions/grids, WebSocket for the live
// loop. Works against the service's exact wire contract, in the browser and
// under node (the scripted steering test injects a WebSocket constructor).

import { parseMhdf, type DepthGrid } from "./mhdf.js";
import {
  parseServerMessage,
  setHipCommand,
  setLevelCommand,
  setRoiCommand,
  type Ack,
  type AssetInfo,
  type RoiWindow,
  type SessionInfo,
} from "./protocol.js";
import { SessionStore } from "./store.js";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export class SessionClient {
  readonly store = new SessionStore();
  private ws: WebSocketLike | null = null;
  private cmdCounter = 0;

  constructor(
    private baseUrl: string,
    private wsFactory: WebSocketFactory = (url) =>
      new WebSocket(url) as unknown as WebSocketLike
  ) {}

  async listAssets(): Promise<AssetInfo[]> {
    const res = await fetch(`${this.baseUrl}/assets`);
    if (!res.ok) throw new Error(`assets: HTTP ${res.status}`);
    return (await res.json()) as AssetInfo[];
  }

  async openSession(assetId: string, opts: object = {}): Promise<SessionInfo> {
    const res = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ asset_id: assetId, ...opts }),
    });
    if (!res.ok) throw new Error(`open session: HTTP ${res.status}`);
    return (await res.json()) as SessionInfo;
  }

  async fetchGrid(assetId: string, level: number): Promise<DepthGrid> {
    const res = await fetch(`${this.baseUrl}/assets/${assetId}/levels/${level}/grid`);
    if (!res.ok) throw new Error(`grid: HTTP ${res.status}`);
    return parseMhdf(await res.arrayBuffer());
  }

  connect(sessionId: string): Promise<void> {
    const wsUrl = this.baseUrl.replace(/^http/, "ws") + `/ws/${sessionId}`;
    const ws = this.wsFactory(wsUrl);
    this.ws = ws;
    ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg) this.store.ingest(msg);
    };
    ws.onclose = () => this.store.dropAll("socket closed");
    return new Promise((resolve) => {
      ws.onopen = () => resolve();
    });
  }

  close(): void {
    this.ws?.close();
    this.ws = null;
  }

  private send(payload: string, cmdId: number): Promise<Ack> {
    if (!this.ws) throw new Error("not connected");
    const ack = this.store.expectAck(cmdId);
    this.ws.send(payload);
    return ack;
  }

  setHip(x: number, y: number, z: number): Promise<Ack> {
    const id = ++this.cmdCounter;
    return this.send(setHipCommand(id, x, y, z), id);
  }

  setRoi(roi: RoiWindow): Promise<Ack> {
    const id = ++this.cmdCounter;
    return this.send(setRoiCommand(id, roi), id);
  }

  setLevel(delta: number): Promise<Ack> {
    const id = ++this.cmdCounter;
    return this.send(setLevelCommand(id, delta), id);
  }
}
