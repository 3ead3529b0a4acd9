// Top-down world-to-canvas projection and scene assembly. Scene building
// is pure data so it can be verified against replayed snapshots; only
// renderScene touches the canvas API.

import { Snapshot } from "./protocol";

export interface Viewport {
  width: number;
  height: number;
}

export interface ViewTransform {
  scale: number; // px per meter
  offsetX: number;
  offsetY: number;
}

// Fit a world-axis-aligned bounding box into the viewport with a margin.
export function fitView(
  boundsMin: [number, number],
  boundsMax: [number, number],
  viewport: Viewport,
  marginPx = 20,
): ViewTransform {
  const w = Math.max(boundsMax[0] - boundsMin[0], 1e-9);
  const h = Math.max(boundsMax[1] - boundsMin[1], 1e-9);
  const scale = Math.min(
    (viewport.width - 2 * marginPx) / w,
    (viewport.height - 2 * marginPx) / h,
  );
  return {
    scale,
    offsetX: marginPx - boundsMin[0] * scale,
    offsetY: viewport.height - marginPx + boundsMin[1] * scale,
  };
}

// Canvas y grows downward; world y grows up-screen.
export function worldToCanvas(
  tf: ViewTransform,
  x: number,
  y: number,
): [number, number] {
  return [tf.offsetX + x * tf.scale, tf.offsetY - y * tf.scale];
}

export interface VehicleGlyph {
  x: number;
  y: number;
  headingX: number; // unit heading in canvas coordinates
  headingY: number;
  velocityX: number; // canvas px per second
  velocityY: number;
  altitude: number;
}

export interface Scene {
  vehicle: VehicleGlyph;
  obstacles: [number, number][];
  trajectory: [number, number][];
  stopMarkers: [number, number][];
  costAlert: boolean;
  costFraction: number; // 0 (safe) .. 1 (at/below threshold)
  mode: string;
  monitoring: boolean;
}

export const COST_GAUGE_SPAN = 3.0; // cost range shown above the threshold

export function buildScene(
  snapshot: Snapshot,
  stopPositions: [number, number][],
  tf: ViewTransform,
  beta = 0.3,
): Scene {
  const [px, py] = snapshot.state.position;
  const [vx, vy] = snapshot.state.velocity;
  const [cx, cy] = worldToCanvas(tf, px, py);
  const cost = snapshot.stop_cost_min;
  let fraction = 0;
  if (cost !== null) {
    fraction = Math.min(1, Math.max(0, 1 - (cost - beta) / COST_GAUGE_SPAN));
  }
  return {
    vehicle: {
      x: cx,
      y: cy,
      headingX: Math.cos(snapshot.state.yaw),
      headingY: -Math.sin(snapshot.state.yaw),
      velocityX: vx * tf.scale,
      velocityY: -vy * tf.scale,
      altitude: snapshot.state.position[2],
    },
    obstacles: snapshot.nearest_obstacles.map(
      (p) => worldToCanvas(tf, p[0], p[1]),
    ),
    trajectory: snapshot.stop_trajectory.map(
      (row) => worldToCanvas(tf, row[1], row[2]),
    ),
    stopMarkers: stopPositions.map(([x, y]) => worldToCanvas(tf, x, y)),
    costAlert: cost !== null && cost < beta,
    costFraction: fraction,
    mode: snapshot.mode,
    monitoring: snapshot.monitoring_enabled,
  };
}

function polyline(
  ctx: CanvasRenderingContext2D,
  pts: [number, number][],
): void {
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  scene: Scene,
  viewport: Viewport,
  disconnected = false,
): void {
  ctx.clearRect(0, 0, viewport.width, viewport.height);
  ctx.fillStyle = "#111418";
  ctx.fillRect(0, 0, viewport.width, viewport.height);

  ctx.fillStyle = "#5f7f9f";
  for (const [x, y] of scene.obstacles) {
    ctx.fillRect(x - 1.5, y - 1.5, 3, 3);
  }

  if (scene.trajectory.length > 1) {
    ctx.strokeStyle = "#ffb347";
    ctx.lineWidth = 2;
    polyline(ctx, scene.trajectory);
  }

  ctx.strokeStyle = "#d04040";
  ctx.lineWidth = 1.5;
  for (const [x, y] of scene.stopMarkers) {
    ctx.beginPath();
    ctx.arc(x, y, 5, 0, 2 * Math.PI);
    ctx.stroke();
  }

  const v = scene.vehicle;
  ctx.fillStyle = scene.mode === "TELEOP" ? "#62d36f" : "#ffcf40";
  ctx.beginPath();
  ctx.arc(v.x, v.y, 6, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = "#ffffff";
  ctx.lineWidth = 2;
  polyline(ctx, [
    [v.x, v.y],
    [v.x + 14 * v.headingX, v.y + 14 * v.headingY],
  ]);
  ctx.strokeStyle = "#62a0d3";
  polyline(ctx, [
    [v.x, v.y],
    [v.x + v.velocityX, v.y + v.velocityY],
  ]);

  // stop-cost gauge along the right edge, threshold line at the top of
  // the alert zone
  const gaugeH = viewport.height * 0.4;
  const gx = viewport.width - 24;
  const gy = viewport.height * 0.3;
  ctx.strokeStyle = "#888";
  ctx.strokeRect(gx, gy, 12, gaugeH);
  const fillH = gaugeH * scene.costFraction;
  ctx.fillStyle = scene.costAlert ? "#e0483c" : "#62d36f";
  ctx.fillRect(gx, gy + gaugeH - fillH, 12, fillH);
  ctx.strokeStyle = "#e0483c";
  polyline(ctx, [
    [gx - 4, gy],
    [gx + 16, gy],
  ]);

  if (disconnected) {
    ctx.fillStyle = "rgba(180, 40, 40, 0.85)";
    ctx.fillRect(0, 0, viewport.width, 28);
    ctx.fillStyle = "#ffffff";
    ctx.font = "14px sans-serif";
    ctx.fillText("disconnected - attempting to reconnect", 10, 19);
  }
}
