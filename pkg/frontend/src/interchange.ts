/**
 * Motion interchange format v1: parsing/validation of server clip documents
 * and the fixed 22-joint skeleton (hierarchy, rest offsets, forward
 * kinematics) needed to pose it in the viewport.
 */

export const FPS = 20;
export const N_JOINTS = 22;

export const JOINT_NAMES = [
  "pelvis", "l_hip", "r_hip", "spine1", "l_knee", "r_knee", "spine2",
  "l_ankle", "r_ankle", "spine3", "l_foot", "r_foot", "neck", "l_collar",
  "r_collar", "head", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow",
  "l_wrist", "r_wrist",
] as const;

/** parent[j] < j for every non-root joint; -1 marks the root. */
export const PARENTS = [
  -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19,
] as const;

/** Rest-pose bone offsets in meters (T-pose, y up, x to the character's left). */
export const REST_OFFSETS: ReadonlyArray<readonly [number, number, number]> = [
  [0.0, 0.0, 0.0],
  [0.09, -0.06, 0.0],
  [-0.09, -0.06, 0.0],
  [0.0, 0.11, 0.0],
  [0.0, -0.4, 0.0],
  [0.0, -0.4, 0.0],
  [0.0, 0.13, 0.0],
  [0.0, -0.42, 0.0],
  [0.0, -0.42, 0.0],
  [0.0, 0.13, 0.0],
  [0.0, -0.06, 0.12],
  [0.0, -0.06, 0.12],
  [0.0, 0.1, 0.0],
  [0.08, 0.05, 0.0],
  [-0.08, 0.05, 0.0],
  [0.0, 0.12, 0.0],
  [0.1, 0.01, 0.0],
  [-0.1, 0.01, 0.0],
  [0.26, 0.0, 0.0],
  [-0.26, 0.0, 0.0],
  [0.25, 0.0, 0.0],
  [-0.25, 0.0, 0.0],
];

export type Vec3 = [number, number, number];
/** Quaternion in (w, x, y, z) order, matching the interchange documents. */
export type Quat = [number, number, number, number];

export interface Frame {
  root: Vec3;
  quats: Quat[]; // 22 unit quaternions, local joint rotations
}

export interface MotionDocument {
  id: string;
  fps: number;
  jointNames: string[];
  frames: Frame[];
  provenance: Record<string, unknown>;
}

export class InterchangeError extends Error {}

function asNumberArray(value: unknown, length: number, what: string): number[] {
  if (!Array.isArray(value) || value.length !== length || !value.every((v) => typeof v === "number" && Number.isFinite(v))) {
    throw new InterchangeError(`${what} must be ${length} finite numbers`);
  }
  return value as number[];
}

/** Validate and normalize a raw interchange document from the wire. */
export function parseInterchange(raw: unknown): MotionDocument {
  if (typeof raw !== "object" || raw === null) {
    throw new InterchangeError("document must be an object");
  }
  const doc = raw as Record<string, unknown>;
  if (doc["format_version"] !== "1") {
    throw new InterchangeError(`unsupported format_version: ${String(doc["format_version"])}`);
  }
  const names = doc["joint_names"];
  if (!Array.isArray(names) || names.length !== N_JOINTS) {
    throw new InterchangeError(`expected ${N_JOINTS} joints`);
  }
  const rawFrames = doc["frames"];
  if (!Array.isArray(rawFrames) || rawFrames.length === 0) {
    throw new InterchangeError("document has no frames");
  }
  const frames: Frame[] = rawFrames.map((f, i) => {
    const fr = f as Record<string, unknown>;
    const root = asNumberArray(fr["root"], 3, `frame ${i} root`) as Vec3;
    const rawQuats = fr["quats"];
    if (!Array.isArray(rawQuats) || rawQuats.length !== N_JOINTS) {
      throw new InterchangeError(`frame ${i} must carry ${N_JOINTS} quaternions`);
    }
    const quats = rawQuats.map((q, j) => asNumberArray(q, 4, `frame ${i} joint ${j} quat`) as Quat);
    return { root, quats };
  });
  const fps = typeof doc["fps"] === "number" ? doc["fps"] : FPS;
  return {
    id: typeof doc["id"] === "string" ? doc["id"] : "",
    fps,
    jointNames: names as string[],
    frames,
    provenance: (doc["provenance"] ?? {}) as Record<string, unknown>,
  };
}

export function durationSeconds(doc: MotionDocument): number {
  return doc.frames.length / doc.fps;
}

// ---------------------------------------------------------------------------
// Quaternion math + forward kinematics
// ---------------------------------------------------------------------------

export function quatMul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatRotate(q: Quat, v: Vec3): Vec3 {
  // v' = q * (0, v) * q^-1 for unit q, expanded without allocations
  const [w, x, y, z] = q;
  const [vx, vy, vz] = v;
  const tx = 2 * (y * vz - z * vy);
  const ty = 2 * (z * vx - x * vz);
  const tz = 2 * (x * vy - y * vx);
  return [
    vx + w * tx + (y * tz - z * ty),
    vy + w * ty + (z * tx - x * tz),
    vz + w * tz + (x * ty - y * tx),
  ];
}

/**
 * World-space joint positions for one frame. `offsetScale` lets avatar
 * variants reproportion the same skeleton (per-joint multipliers).
 */
export function forwardKinematics(frame: Frame, offsetScale?: ReadonlyArray<number>): Vec3[] {
  const positions: Vec3[] = new Array(N_JOINTS);
  const worldQuats: Quat[] = new Array(N_JOINTS);
  for (let j = 0; j < N_JOINTS; j += 1) {
    const parent = PARENTS[j];
    const scale = offsetScale ? offsetScale[j] : 1;
    const offset: Vec3 = [
      REST_OFFSETS[j][0] * scale,
      REST_OFFSETS[j][1] * scale,
      REST_OFFSETS[j][2] * scale,
    ];
    if (parent < 0) {
      worldQuats[j] = frame.quats[j];
      positions[j] = [...frame.root];
    } else {
      worldQuats[j] = quatMul(worldQuats[parent], frame.quats[j]);
      const rotated = quatRotate(worldQuats[parent], offset);
      const p = positions[parent];
      positions[j] = [p[0] + rotated[0], p[1] + rotated[1], p[2] + rotated[2]];
    }
  }
  return positions;
}

/** Bone list as (parent, child) joint index pairs for line drawing. */
export const BONES: ReadonlyArray<readonly [number, number]> = PARENTS.flatMap(
  (parent, child) => (parent < 0 ? [] : [[parent, child] as const]),
);
