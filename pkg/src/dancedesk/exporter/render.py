"""Stick-figure frame rendering through a pinhole camera.

No hidden-surface removal: every bone is drawn, occluded or not. Pixels are
a pure function of (clip, camera, size); anti-aliasing comes from 2x
supersampling with a deterministic LANCZOS downscale.
"""
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from ..errors import CameraError
from ..kinematics import fk_clip
from ..motion import MotionClip
from ..skeleton import N_JOINTS, Skeleton, default_skeleton

DEFAULT_SIZE = (640, 480)
SUPERSAMPLE = 2
BG = (255, 255, 255)
BONE = (20, 20, 30)
JOINT = (180, 40, 40)


@dataclass(frozen=True)
class Camera:
    position: tuple = (0.0, 1.2, 3.2)
    look_at: tuple = (0.0, 0.9, 0.0)
    vertical_fov_deg: float = 50.0


def camera_basis(camera: Camera):
    pos = np.asarray(camera.position, dtype=np.float64)
    target = np.asarray(camera.look_at, dtype=np.float64)
    forward = target - pos
    dist = np.linalg.norm(forward)
    if dist < 1e-9:
        raise CameraError("camera position equals look_at")
    forward /= dist
    world_up = np.array([0.0, 1.0, 0.0])
    if abs(np.dot(forward, world_up)) > 0.999:
        world_up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, world_up)
    right /= np.linalg.norm(right)
    up = np.cross(right, forward)
    return pos, right, up, forward


def project_points(points: np.ndarray, camera: Camera, size=DEFAULT_SIZE):
    """Pinhole projection to pixel coordinates; returns (N, 2) xy and (N,) depth."""
    pos, right, up, forward = camera_basis(camera)
    rel = points - pos
    x = rel @ right
    y = rel @ up
    z = rel @ forward
    focal = (size[1] / 2.0) / np.tan(np.radians(camera.vertical_fov_deg) / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        px = size[0] / 2.0 + focal * x / z
        py = size[1] / 2.0 - focal * y / z
    return np.stack([px, py], axis=-1), z


def _bones(skeleton: Skeleton):
    return [(skeleton.parents[j], j) for j in range(1, N_JOINTS)]


def render_frames(clip: MotionClip, camera: Camera | None = None, size=DEFAULT_SIZE,
                  skeleton: Skeleton | None = None):
    """One RGB image per frame, in frame order."""
    camera = camera or Camera()
    skeleton = skeleton or default_skeleton()
    camera_basis(camera)  # validate before doing any work
    positions = fk_clip(clip, skeleton)
    bones = _bones(skeleton)
    ss = (size[0] * SUPERSAMPLE, size[1] * SUPERSAMPLE)
    images = []
    for f in range(clip.n_frames):
        xy, depth = project_points(positions[f], camera, ss)
        img = Image.new("RGB", ss, BG)
        draw = ImageDraw.Draw(img)
        for p, j in bones:
            if depth[p] <= 1e-6 or depth[j] <= 1e-6:
                continue  # behind the camera
            draw.line(
                [tuple(np.round(xy[p], 2)), tuple(np.round(xy[j], 2))],
                fill=BONE, width=2 * SUPERSAMPLE,
            )
        r = 3 * SUPERSAMPLE
        for j in range(N_JOINTS):
            if depth[j] <= 1e-6:
                continue
            cx, cy = xy[j]
            draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=JOINT)
        images.append(img.resize(size, Image.LANCZOS))
    return images


def render_to_dir(clip: MotionClip, out_dir, camera: Camera | None = None, size=DEFAULT_SIZE) -> list:
    """Write frame_%05d.png files; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, img in enumerate(render_frames(clip, camera, size)):
        path = os.path.join(out_dir, f"frame_{i:05d}.png")
        img.save(path)
        paths.append(path)
    return paths


def render_thumbnail(clip: MotionClip, path, size=(160, 120)) -> None:
    """First-frame render used for gallery thumbnails."""
    first = MotionClip(root=clip.root[:1], quats=clip.quats[:1], provenance=clip.provenance, id=clip.id)
    render_frames(first, size=size)[0].save(path)
