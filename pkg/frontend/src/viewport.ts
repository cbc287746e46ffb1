/**
 * Viewport math and skeleton drawing: an orbit camera (rotate / zoom / pan),
 * a pinhole projection onto the canvas, avatar proportion variants, and the
 * 20 fps playback clock. Pure functions except for the draw call, which
 * writes through a minimal 2D-context interface so tests can record it.
 */

import {
  BONES,
  Frame,
  N_JOINTS,
  Vec3,
  forwardKinematics,
} from "./interchange.js";

export interface OrbitCamera {
  target: Vec3;
  yaw: number; // radians around +y
  pitch: number; // radians above the horizon
  distance: number;
  fovDegrees: number;
}

export function defaultCamera(): OrbitCamera {
  return { target: [0, 0.9, 0], yaw: 0, pitch: 0.15, distance: 3.5, fovDegrees: 60 };
}

export function orbit(cam: OrbitCamera, dYaw: number, dPitch: number): OrbitCamera {
  const limit = Math.PI / 2 - 0.01;
  return {
    ...cam,
    yaw: cam.yaw + dYaw,
    pitch: Math.min(limit, Math.max(-limit, cam.pitch + dPitch)),
  };
}

export function zoom(cam: OrbitCamera, factor: number): OrbitCamera {
  return { ...cam, distance: Math.min(20, Math.max(0.5, cam.distance * factor)) };
}

export function pan(cam: OrbitCamera, dx: number, dy: number): OrbitCamera {
  // Pan in the camera's screen plane.
  const right: Vec3 = [Math.cos(cam.yaw), 0, -Math.sin(cam.yaw)];
  return {
    ...cam,
    target: [
      cam.target[0] + right[0] * dx,
      cam.target[1] + dy,
      cam.target[2] + right[2] * dx,
    ],
  };
}

export function cameraPosition(cam: OrbitCamera): Vec3 {
  const cy = Math.cos(cam.yaw);
  const sy = Math.sin(cam.yaw);
  const cp = Math.cos(cam.pitch);
  const sp = Math.sin(cam.pitch);
  return [
    cam.target[0] + cam.distance * cp * sy,
    cam.target[1] + cam.distance * sp,
    cam.target[2] + cam.distance * cp * cy,
  ];
}

/**
 * Project a world point to canvas pixels. Returns null when the point is
 * behind the camera. The camera looks from cameraPosition toward target.
 */
export function project(
  cam: OrbitCamera,
  point: Vec3,
  width: number,
  height: number,
): [number, number] | null {
  const eye = cameraPosition(cam);
  // View basis: forward toward target, right/up from yaw & pitch.
  const f: Vec3 = [
    cam.target[0] - eye[0],
    cam.target[1] - eye[1],
    cam.target[2] - eye[2],
  ];
  const fLen = Math.hypot(f[0], f[1], f[2]);
  const fw: Vec3 = [f[0] / fLen, f[1] / fLen, f[2] / fLen];
  const right: Vec3 = [Math.cos(cam.yaw), 0, -Math.sin(cam.yaw)];
  const up: Vec3 = [
    right[1] * fw[2] - right[2] * fw[1],
    right[2] * fw[0] - right[0] * fw[2],
    right[0] * fw[1] - right[1] * fw[0],
  ];
  const rel: Vec3 = [point[0] - eye[0], point[1] - eye[1], point[2] - eye[2]];
  const x = rel[0] * right[0] + rel[1] * right[1] + rel[2] * right[2];
  const y = rel[0] * up[0] + rel[1] * up[1] + rel[2] * up[2];
  const z = rel[0] * fw[0] + rel[1] * fw[1] + rel[2] * fw[2];
  if (z <= 1e-6) return null;
  const focal = height / 2 / Math.tan((cam.fovDegrees * Math.PI) / 360);
  return [width / 2 + (focal * x) / z, height / 2 - (focal * y) / z];
}

// ---------------------------------------------------------------------------
// Avatar variants: differently proportioned skeletons standing in for meshes.
// ---------------------------------------------------------------------------

export interface AvatarVariant {
  name: string;
  /** Per-joint rest-offset multipliers (length 22). */
  offsetScale: number[];
  color: string;
}

function uniform(scale: number): number[] {
  return new Array(N_JOINTS).fill(scale);
}

export const AVATAR_VARIANTS: AvatarVariant[] = [
  { name: "standard", offsetScale: uniform(1.0), color: "#40c4ff" },
  { name: "tall", offsetScale: uniform(1.15), color: "#ffab40" },
  {
    name: "compact",
    // Shorter legs (knees/ankles), everything else near standard.
    offsetScale: uniform(0.95).map((s, j) => ([4, 5, 7, 8].includes(j) ? 0.75 : s)),
    color: "#69f0ae",
  },
];

// ---------------------------------------------------------------------------
// Playback clock
// ---------------------------------------------------------------------------

/** Frame to display at wall-clock time t seconds into looping playback. */
export function frameForTime(tSeconds: number, fps: number, nFrames: number): number {
  if (nFrames <= 0) return 0;
  return Math.floor(tSeconds * fps) % nFrames;
}

// ---------------------------------------------------------------------------
// Drawing
// ---------------------------------------------------------------------------

/** The slice of CanvasRenderingContext2D the renderer needs. */
export interface Draw2D {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export function drawSkeleton(
  ctx: Draw2D,
  cam: OrbitCamera,
  frame: Frame,
  width: number,
  height: number,
  variant: AvatarVariant,
  showSkeleton: boolean,
): void {
  if (!showSkeleton) return;
  const positions = forwardKinematics(frame, variant.offsetScale);
  const projected = positions.map((p) => project(cam, p, width, height));
  ctx.strokeStyle = variant.color;
  ctx.fillStyle = variant.color;
  ctx.lineWidth = 3;
  for (const [parent, child] of BONES) {
    const a = projected[parent];
    const b = projected[child];
    if (!a || !b) continue;
    ctx.beginPath();
    ctx.moveTo(a[0], a[1]);
    ctx.lineTo(b[0], b[1]);
    ctx.stroke();
  }
  for (const p of projected) {
    if (!p) continue;
    ctx.beginPath();
    ctx.arc(p[0], p[1], 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}
