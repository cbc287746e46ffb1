# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched forward kinematics; same contract as fk_numpy."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def fk_positions(const double[:, ::1] root, const double[:, :, ::1] quats,
                 const long[::1] parents, const double[:, ::1] offsets):
    cdef Py_ssize_t n_frames = quats.shape[0]
    cdef Py_ssize_t n_joints = quats.shape[1]
    pos_arr = np.empty((n_frames, n_joints, 3), dtype=np.float64)
    grot_arr = np.empty((n_frames, n_joints, 4), dtype=np.float64)
    cdef double[:, :, ::1] pos = pos_arr
    cdef double[:, :, ::1] grot = grot_arr
    cdef Py_ssize_t f, j, p
    cdef double ox, oy, oz, qw, qx, qy, qz
    cdef double tx, ty, tz, cx, cy, cz
    cdef double aw, ax, ay, az, bw, bx, by, bz

    for f in range(n_frames):
        pos[f, 0, 0] = root[f, 0] + offsets[0, 0]
        pos[f, 0, 1] = root[f, 1] + offsets[0, 1]
        pos[f, 0, 2] = root[f, 2] + offsets[0, 2]
        grot[f, 0, 0] = quats[f, 0, 0]
        grot[f, 0, 1] = quats[f, 0, 1]
        grot[f, 0, 2] = quats[f, 0, 2]
        grot[f, 0, 3] = quats[f, 0, 3]
        for j in range(1, n_joints):
            p = parents[j]
            ox = offsets[j, 0]; oy = offsets[j, 1]; oz = offsets[j, 2]
            qw = grot[f, p, 0]; qx = grot[f, p, 1]; qy = grot[f, p, 2]; qz = grot[f, p, 3]
            # t = 2 * (qv x off)
            tx = 2.0 * (qy * oz - qz * oy)
            ty = 2.0 * (qz * ox - qx * oz)
            tz = 2.0 * (qx * oy - qy * ox)
            # c = qv x t
            cx = qy * tz - qz * ty
            cy = qz * tx - qx * tz
            cz = qx * ty - qy * tx
            pos[f, j, 0] = pos[f, p, 0] + ox + qw * tx + cx
            pos[f, j, 1] = pos[f, p, 1] + oy + qw * ty + cy
            pos[f, j, 2] = pos[f, p, 2] + oz + qw * tz + cz
            aw = qw; ax = qx; ay = qy; az = qz
            bw = quats[f, j, 0]; bx = quats[f, j, 1]; by = quats[f, j, 2]; bz = quats[f, j, 3]
            grot[f, j, 0] = aw * bw - ax * bx - ay * by - az * bz
            grot[f, j, 1] = aw * bx + ax * bw + ay * bz - az * by
            grot[f, j, 2] = aw * by - ax * bz + ay * bw + az * bx
            grot[f, j, 3] = aw * bz + ax * by - ay * bx + az * bw
    return pos_arr
