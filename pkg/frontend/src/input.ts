// Keyboard state to velocity commands. WASD moves in the top-down view
// plane (W = up-screen = +y world), R/F climb and descend, Q/E yaw.
// The planar+vertical velocity is normalized to the speed setting so
// diagonals are no faster than straight flight.

export interface CommandInput {
  velocity: [number, number, number];
  yawRate: number;
}

export const YAW_RATE = 1.5; // rad/s commanded while Q or E is held

export function keysToCommand(
  held: ReadonlySet<string>,
  speedSetting: number,
): CommandInput {
  let vx = 0;
  let vy = 0;
  let vz = 0;
  if (held.has("w")) vy += 1;
  if (held.has("s")) vy -= 1;
  if (held.has("d")) vx += 1;
  if (held.has("a")) vx -= 1;
  if (held.has("r")) vz += 1;
  if (held.has("f")) vz -= 1;
  let yawRate = 0;
  if (held.has("q")) yawRate += YAW_RATE;
  if (held.has("e")) yawRate -= YAW_RATE;

  const mag = Math.hypot(vx, vy, vz);
  if (mag > 1e-12) {
    const scale = speedSetting / mag;
    vx *= scale;
    vy *= scale;
    vz *= scale;
  }
  return { velocity: [vx, vy, vz], yawRate };
}

export function normalizeKey(key: string): string {
  return key.length === 1 ? key.toLowerCase() : key;
}
