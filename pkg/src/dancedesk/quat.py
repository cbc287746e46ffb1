"""Quaternion helpers, vectorized over leading axes.

Quaternions are stored (w, x, y, z). The canonical representation keeps
w >= 0 so equality checks are not confused by the double cover.
"""
import numpy as np


def normalize(q):
    """Scale quaternions to unit norm. Raises on zero-norm input."""
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0.0) or not np.all(np.isfinite(n)):
        raise ValueError("zero or non-finite quaternion norm")
    return q / n


def canonicalize(q):
    """Unit-normalize and flip sign so w >= 0."""
    q = normalize(q)
    flip = np.where(q[..., :1] < 0.0, -1.0, 1.0)
    return q * flip


def mul(a, b):
    """Hamilton product a * b."""
    aw, ax, ay, az = (a[..., i] for i in range(4))
    bw, bx, by, bz = (b[..., i] for i in range(4))
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def rotate(q, v):
    """Rotate vectors v by unit quaternions q."""
    qw = q[..., :1]
    qv = q[..., 1:]
    t = 2.0 * np.cross(qv, v)
    return v + qw * t + np.cross(qv, t)


def from_axis_angle(axis, angle):
    """Unit quaternion for a rotation of `angle` radians about `axis`.

    `axis` must be unit length; `angle` may broadcast against it.
    """
    axis = np.asarray(axis, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    half = angle / 2.0
    w = np.cos(half)
    xyz = np.sin(half)[..., None] * axis
    return np.concatenate([w[..., None], xyz], axis=-1)


def to_rotvec(q):
    """Rotation-vector (axis * angle) log map; shape (..., 3)."""
    q = canonicalize(q)
    w = np.clip(q[..., 0], -1.0, 1.0)
    v = q[..., 1:]
    vn = np.linalg.norm(v, axis=-1)
    angle = 2.0 * np.arctan2(vn, w)
    scale = np.where(vn > 1e-12, angle / np.where(vn > 1e-12, vn, 1.0), 2.0)
    return v * scale[..., None]


def to_matrix(q):
    """3x3 rotation matrices for unit quaternions."""
    w, x, y, z = (q[..., i] for i in range(4))
    m = np.empty(q.shape[:-1] + (3, 3), dtype=np.float64)
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - z * w)
    m[..., 0, 2] = 2 * (x * z + y * w)
    m[..., 1, 0] = 2 * (x * y + z * w)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - x * w)
    m[..., 2, 0] = 2 * (x * z - y * w)
    m[..., 2, 1] = 2 * (y * z + x * w)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m
