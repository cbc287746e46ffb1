"""Forward kinematics and position-space motion metrics."""
import numpy as np

from . import _kernels
from .errors import InvalidPose, LengthError
from .motion import MotionClip, Pose
from .skeleton import Skeleton, default_skeleton

QUAT_NORM_TOL = 1e-3


def _check_quats(quats):
    if not np.all(np.isfinite(quats)):
        raise InvalidPose("non-finite quaternion")
    norms = np.linalg.norm(quats, axis=-1)
    if np.any(np.abs(norms - 1.0) > QUAT_NORM_TOL):
        raise InvalidPose("quaternion norm off unit beyond 1e-3")


def fk_batch(skeleton: Skeleton, root: np.ndarray, quats: np.ndarray) -> np.ndarray:
    """Joint positions for (F, 3) roots and (F, 22, 4) local rotations."""
    root = np.ascontiguousarray(root, dtype=np.float64)
    quats = np.ascontiguousarray(quats, dtype=np.float64)
    _check_quats(quats)
    parents = np.ascontiguousarray(skeleton.parents, dtype=np.int64)
    offsets = np.ascontiguousarray(skeleton.offsets, dtype=np.float64)
    return _kernels.fk_positions(root, quats, parents, offsets)


def forward_kinematics(skeleton: Skeleton, pose: Pose) -> np.ndarray:
    """World-space positions (22, 3) of a single pose."""
    return fk_batch(skeleton, pose.root_translation[None], pose.rotations[None])[0]


def fk_clip(clip: MotionClip, skeleton: Skeleton | None = None) -> np.ndarray:
    """Positions (frames, 22, 3) for every frame of a clip."""
    return fk_batch(skeleton or default_skeleton(), clip.root, clip.quats)


def seam_discontinuity(clip: MotionClip, seam_frame: int, skeleton: Skeleton | None = None) -> float:
    """Largest per-joint position jump (m) between seam_frame-1 and seam_frame."""
    if not 1 <= seam_frame < clip.n_frames:
        raise IndexError(f"seam {seam_frame} out of range for {clip.n_frames} frames")
    sk = skeleton or default_skeleton()
    pos = fk_batch(sk, clip.root[seam_frame - 1 : seam_frame + 1], clip.quats[seam_frame - 1 : seam_frame + 1])
    return float(np.max(np.linalg.norm(pos[1] - pos[0], axis=-1)))


def frame_displacements(clip: MotionClip, skeleton: Skeleton | None = None) -> np.ndarray:
    """Max-over-joints position displacement for each consecutive frame pair."""
    pos = fk_clip(clip, skeleton)
    return np.max(np.linalg.norm(np.diff(pos, axis=0), axis=-1), axis=-1)


def pairwise_rmsd(a: MotionClip, b: MotionClip, skeleton: Skeleton | None = None) -> float:
    """Root-mean-square FK position distance over frames and joints (m)."""
    if a.n_frames != b.n_frames:
        raise LengthError(f"frame counts differ: {a.n_frames} vs {b.n_frames}")
    sk = skeleton or default_skeleton()
    diff = fk_clip(a, sk) - fk_clip(b, sk)
    return float(np.sqrt(np.mean(np.sum(diff * diff, axis=-1))))
