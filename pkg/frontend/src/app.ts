// Browser entry point: websocket plumbing, keyboard capture, and the
// render loop. All simulation truth comes from server snapshots; this
// file only wires DOM events to protocol messages.

import { keysToCommand, normalizeKey } from "./input";
import {
  commandMessage,
  parseServerMessage,
  resetMessage,
  toggleMonitoringMessage,
} from "./protocol";
import { SessionState } from "./session";
import { buildScene, fitView, renderScene, Viewport } from "./view";

const COMMAND_PERIOD_MS = 50; // 20 Hz, matched to the server tick multiple
const RECONNECT_DELAY_MS = 1000;

// world extent shown; generated scenarios fit comfortably inside
const WORLD_MIN: [number, number] = [0, 0];
const WORLD_MAX: [number, number] = [40, 40];

function serverUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const given = params.get("server");
  if (given) return given;
  return `ws://${window.location.hostname || "127.0.0.1"}:8000/ws`;
}

function speedSetting(): number {
  const el = document.getElementById("speed") as HTMLInputElement | null;
  const v = el ? parseFloat(el.value) : NaN;
  return Number.isFinite(v) && v > 0 ? v : 1.5;
}

class TeleopApp {
  private state = new SessionState();
  private held = new Set<string>();
  private ws: WebSocket | null = null;
  private seq = 0;
  private canvas: HTMLCanvasElement;
  private feedEl: HTMLElement;
  private statusEl: HTMLElement;

  constructor() {
    this.canvas = document.getElementById("map") as HTMLCanvasElement;
    this.feedEl = document.getElementById("feed") as HTMLElement;
    this.statusEl = document.getElementById("status") as HTMLElement;
    window.addEventListener("keydown", (e) => {
      if (!e.repeat) this.held.add(normalizeKey(e.key));
    });
    window.addEventListener("keyup", (e) => {
      this.held.delete(normalizeKey(e.key));
    });
    window.addEventListener("blur", () => this.held.clear());
    document.getElementById("reset")?.addEventListener("click", () => {
      this.send(resetMessage(++this.seq));
      this.state.onReset();
    });
    document.getElementById("toggle")?.addEventListener("click", () => {
      const arming = !(this.state.snapshot?.monitoring_enabled ?? true);
      const verb = arming ? "enable" : "DISABLE";
      if (window.confirm(`Really ${verb} collision monitoring?`)) {
        this.send(toggleMonitoringMessage(++this.seq));
      }
    });
    this.connect();
    setInterval(() => this.pushCommand(), COMMAND_PERIOD_MS);
    const draw = () => {
      this.render();
      requestAnimationFrame(draw);
    };
    requestAnimationFrame(draw);
  }

  private connect(): void {
    const ws = new WebSocket(serverUrl());
    this.ws = ws;
    ws.onopen = () => {
      this.state.onConnect();
      this.seq = 0;
    };
    ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg) {
        this.state.ingest(msg);
        if (msg.type === "event") this.renderFeed();
      }
    };
    ws.onclose = () => {
      this.state.onDisconnect();
      setTimeout(() => this.connect(), RECONNECT_DELAY_MS);
    };
    ws.onerror = () => ws.close();
  }

  private send(payload: string): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(payload);
    }
  }

  private pushCommand(): void {
    if (!this.state.connected) return;
    const cmd = keysToCommand(this.held, speedSetting());
    this.send(commandMessage(
      ++this.seq, cmd.velocity, cmd.yawRate, Date.now() / 1000));
  }

  private renderFeed(): void {
    this.feedEl.textContent = this.state.feed
      .slice()
      .reverse()
      .map((e) => e.text)
      .join("\n");
  }

  private render(): void {
    const snap = this.state.snapshot;
    const viewport: Viewport = {
      width: this.canvas.width,
      height: this.canvas.height,
    };
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !snap) return;
    const tf = fitView(WORLD_MIN, WORLD_MAX, viewport);
    const scene = buildScene(snap, this.state.stopPositions, tf);
    renderScene(ctx, scene, viewport, !this.state.connected);
    const cost = snap.stop_cost_min;
    this.statusEl.textContent =
      `mode ${snap.mode}  monitoring ${snap.monitoring_enabled ? "on" : "off"}` +
      `  alt ${snap.state.position[2].toFixed(2)} m` +
      `  cost ${cost === null ? "-" : cost.toFixed(3)}` +
      (this.state.lastError ? `  error: ${this.state.lastError}` : "");
  }
}

window.addEventListener("DOMContentLoaded", () => new TeleopApp());
