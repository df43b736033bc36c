// Client-side session state: latest-wins snapshot slot, pending command
// acks, and the view state the panels render from. No simulation happens
// here; when snapshots stop arriving the scene freezes as-is.

import type { Ack, RoiWindow, ServerMessage, Snapshot } from "./protocol.js";
import { forceMagnitude } from "./protocol.js";

export interface ViewState {
  snapshot: Snapshot | null;
  ackedRoi: RoiWindow | null; // what the overview outlines: server truth only
  forceReadoutN: number;
  lastError: string | null;
}

type AckWaiter = {
  resolve: (ack: Ack) => void;
  reject: (err: Error) => void;
};

export class SessionStore {
  view: ViewState = { snapshot: null, ackedRoi: null, forceReadoutN: 0, lastError: null };
  private waiters = new Map<number, AckWaiter>();
  private listeners: Array<(view: ViewState) => void> = [];

  onChange(listener: (view: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l(this.view);
  }

  /** Register interest in the ack for a command id. */
  expectAck(cmdId: number, timeoutMs = 2000): Promise<Ack> {
    return new Promise<Ack>((resolve, reject) => {
      const timer = setTimeout(() => {
        this.waiters.delete(cmdId);
        reject(new Error(`ack ${cmdId} timed out`));
      }, timeoutMs);
      this.waiters.set(cmdId, {
        resolve: (ack) => {
          clearTimeout(timer);
          resolve(ack);
        },
        reject: (err) => {
          clearTimeout(timer);
          reject(err);
        },
      });
    });
  }

  ingest(msg: ServerMessage): void {
    switch (msg.type) {
      case "snapshot":
        // latest-wins: an older queued frame must never regress the view
        if (!this.view.snapshot || msg.seq >= this.view.snapshot.seq) {
          this.view.snapshot = msg;
          this.view.ackedRoi = msg.roi;
          this.view.forceReadoutN = forceMagnitude(msg.force);
        }
        break;
      case "ack": {
        if (msg.cmd_id !== null) {
          const waiter = this.waiters.get(msg.cmd_id);
          if (waiter) {
            this.waiters.delete(msg.cmd_id);
            waiter.resolve(msg);
          }
        }
        break;
      }
      case "error":
        this.view.lastError = `${msg.code}: ${msg.message}`;
        if (msg.cmd_id != null) {
          const waiter = this.waiters.get(msg.cmd_id);
          if (waiter) {
            this.waiters.delete(msg.cmd_id);
            waiter.reject(new Error(this.view.lastError));
          }
        }
        break;
    }
    this.emit();
  }

  dropAll(reason: string): void {
    for (const [, waiter] of this.waiters) waiter.reject(new Error(reason));
    this.waiters.clear();
  }
}
