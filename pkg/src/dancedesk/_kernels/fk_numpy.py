"""Pure-numpy batched forward kinematics, vectorized over frames."""
import numpy as np


def fk_positions(root, quats, parents, offsets):
    """World-space joint positions for a batch of frames.

    root: (F, 3); quats: (F, 22, 4) wxyz, unit; parents: (22,) int;
    offsets: (22, 3). Returns (F, 22, 3).
    """
    n_frames, n_joints = quats.shape[0], quats.shape[1]
    pos = np.empty((n_frames, n_joints, 3), dtype=np.float64)
    grot = np.empty((n_frames, n_joints, 4), dtype=np.float64)

    pos[:, 0] = root + offsets[0]
    grot[:, 0] = quats[:, 0]
    for j in range(1, n_joints):
        p = parents[j]
        qp = grot[:, p]
        off = offsets[j]
        # rotate offset by parent global rotation: v + 2w(q x v) + 2 q x (q x v)
        qv = qp[:, 1:]
        t = 2.0 * np.cross(qv, np.broadcast_to(off, (n_frames, 3)))
        pos[:, j] = pos[:, p] + off + qp[:, :1] * t + np.cross(qv, t)
        # parent global quat times local quat
        aw, ax, ay, az = qp[:, 0], qp[:, 1], qp[:, 2], qp[:, 3]
        bw, bx, by, bz = quats[:, j, 0], quats[:, j, 1], quats[:, j, 2], quats[:, j, 3]
        grot[:, j, 0] = aw * bw - ax * bx - ay * by - az * bz
        grot[:, j, 1] = aw * bx + ax * bw + ay * bz - az * by
        grot[:, j, 2] = aw * by - ax * bz + ay * bw + az * bx
        grot[:, j, 3] = aw * bz + ax * by - ay * bx + az * bw
    return pos
