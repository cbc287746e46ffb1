import { describe, expect, it } from "vitest";

import { Frame, N_JOINTS, Quat } from "../src/interchange.js";
import {
  AVATAR_VARIANTS,
  Draw2D,
  OrbitCamera,
  cameraPosition,
  defaultCamera,
  drawSkeleton,
  frameForTime,
  orbit,
  pan,
  project,
  zoom,
} from "../src/viewport.js";

function identityFrame(): Frame {
  return {
    root: [0, 0.9, 0],
    quats: Array.from({ length: N_JOINTS }, () => [1, 0, 0, 0] as Quat),
  };
}

describe("orbit camera", () => {
  it("yaw 0 / pitch 0 places the camera on +z looking at the target", () => {
    const cam: OrbitCamera = { target: [0, 1, 0], yaw: 0, pitch: 0, distance: 3, fovDegrees: 60 };
    expect(cameraPosition(cam)).toEqual([0, 1, 3]);
  });

  it("pitch is clamped short of the poles", () => {
    let cam = defaultCamera();
    for (let i = 0; i < 100; i += 1) cam = orbit(cam, 0, 0.5);
    expect(cam.pitch).toBeLessThan(Math.PI / 2);
  });

  it("zoom clamps distance into a usable range", () => {
    let cam = defaultCamera();
    for (let i = 0; i < 50; i += 1) cam = zoom(cam, 0.5);
    expect(cam.distance).toBeCloseTo(0.5, 12);
    for (let i = 0; i < 50; i += 1) cam = zoom(cam, 2);
    expect(cam.distance).toBeCloseTo(20, 12);
  });

  it("pan moves the target in the screen plane", () => {
    const cam = { ...defaultCamera(), yaw: 0 };
    const moved = pan(cam, 0.5, 0.2);
    expect(moved.target[0]).toBeCloseTo(cam.target[0] + 0.5, 12);
    expect(moved.target[1]).toBeCloseTo(cam.target[1] + 0.2, 12);
  });
});

describe("projection oracle", () => {
  const cam: OrbitCamera = { target: [0, 0, 0], yaw: 0, pitch: 0, distance: 3, fovDegrees: 60 };

  it("the look-at target projects to the canvas center", () => {
    const p = project(cam, [0, 0, 0], 640, 480);
    expect(p).not.toBeNull();
    expect(p![0]).toBeCloseTo(320, 9);
    expect(p![1]).toBeCloseTo(240, 9);
  });

  it("matches the hand-computed pinhole for an off-axis point", () => {
    // Camera at (0,0,3) looking down -z, focal = (480/2)/tan(30 deg).
    const focal = 240 / Math.tan(Math.PI / 6);
    const p = project(cam, [0.5, 0.25, 1], 640, 480);
    expect(p![0]).toBeCloseTo(320 + (focal * 0.5) / 2, 9);
    expect(p![1]).toBeCloseTo(240 - (focal * 0.25) / 2, 9);
  });

  it("points behind the camera are culled", () => {
    expect(project(cam, [0, 0, 5], 640, 480)).toBeNull();
  });
});

describe("playback clock", () => {
  it("advances at the clip frame rate and loops", () => {
    expect(frameForTime(0, 20, 100)).toBe(0);
    expect(frameForTime(0.049, 20, 100)).toBe(0);
    expect(frameForTime(0.05, 20, 100)).toBe(1);
    expect(frameForTime(2.5, 20, 100)).toBe(50);
    expect(frameForTime(5.0, 20, 100)).toBe(0); // wrapped
    expect(frameForTime(5.05, 20, 100)).toBe(1);
  });

  it("is safe with an empty clip", () => {
    expect(frameForTime(1, 20, 0)).toBe(0);
  });
});

describe("skeleton drawing", () => {
  function recordingContext() {
    const calls: string[] = [];
    const ctx: Draw2D = {
      beginPath: () => calls.push("beginPath"),
      moveTo: () => calls.push("moveTo"),
      lineTo: () => calls.push("lineTo"),
      arc: () => calls.push("arc"),
      stroke: () => calls.push("stroke"),
      fill: () => calls.push("fill"),
      strokeStyle: "",
      fillStyle: "",
      lineWidth: 1,
    };
    return { ctx, calls };
  }

  it("draws all 21 bones and 22 joints when visible", () => {
    const { ctx, calls } = recordingContext();
    drawSkeleton(ctx, defaultCamera(), identityFrame(), 640, 480, AVATAR_VARIANTS[0], true);
    expect(calls.filter((c) => c === "lineTo")).toHaveLength(21);
    expect(calls.filter((c) => c === "arc")).toHaveLength(22);
  });

  it("visibility checkbox off means nothing is drawn", () => {
    const { ctx, calls } = recordingContext();
    drawSkeleton(ctx, defaultCamera(), identityFrame(), 640, 480, AVATAR_VARIANTS[0], false);
    expect(calls).toHaveLength(0);
  });

  it("offers three differently proportioned avatar variants", () => {
    expect(AVATAR_VARIANTS).toHaveLength(3);
    const names = new Set(AVATAR_VARIANTS.map((v) => v.name));
    expect(names.size).toBe(3);
    for (const v of AVATAR_VARIANTS) expect(v.offsetScale).toHaveLength(N_JOINTS);
  });
});
