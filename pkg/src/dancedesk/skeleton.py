"""Canonical 22-joint skeleton: names, hierarchy, rest pose, body-part groups."""
from dataclasses import dataclass

import numpy as np

from .errors import UnknownBodyPart

JOINT_NAMES = (
    "pelvis",
    "l_hip",
    "r_hip",
    "spine1",
    "l_knee",
    "r_knee",
    "spine2",
    "l_ankle",
    "r_ankle",
    "spine3",
    "l_foot",
    "r_foot",
    "neck",
    "l_collar",
    "r_collar",
    "head",
    "l_shoulder",
    "r_shoulder",
    "l_elbow",
    "r_elbow",
    "l_wrist",
    "r_wrist",
)

N_JOINTS = 22

# parent[j] < j for every non-root joint; -1 marks the root.
PARENTS = (-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19)

# Rest-pose bone offsets in meters (T-pose, y up, x to the character's left).
# Total stature is roughly 1.7 m with the pelvis near 0.95 m when standing.
_REST_OFFSETS = (
    (0.00, 0.00, 0.00),   # pelvis
    (0.09, -0.06, 0.00),  # l_hip
    (-0.09, -0.06, 0.00), # r_hip
    (0.00, 0.11, 0.00),   # spine1
    (0.00, -0.40, 0.00),  # l_knee
    (0.00, -0.40, 0.00),  # r_knee
    (0.00, 0.13, 0.00),   # spine2
    (0.00, -0.42, 0.00),  # l_ankle
    (0.00, -0.42, 0.00),  # r_ankle
    (0.00, 0.13, 0.00),   # spine3
    (0.00, -0.06, 0.12),  # l_foot
    (0.00, -0.06, 0.12),  # r_foot
    (0.00, 0.10, 0.00),   # neck
    (0.08, 0.05, 0.00),   # l_collar
    (-0.08, 0.05, 0.00),  # r_collar
    (0.00, 0.12, 0.00),   # head
    (0.10, 0.01, 0.00),   # l_shoulder
    (-0.10, 0.01, 0.00),  # r_shoulder
    (0.26, 0.00, 0.00),   # l_elbow
    (-0.26, 0.00, 0.00),  # r_elbow
    (0.25, 0.00, 0.00),   # l_wrist
    (-0.25, 0.00, 0.00),  # r_wrist
)


@dataclass(frozen=True)
class Skeleton:
    """Joint hierarchy plus rest-pose bone offsets (meters)."""

    parents: tuple
    offsets: np.ndarray  # (22, 3), read-only

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=np.float64)
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        if len(self.parents) != N_JOINTS or offsets.shape != (N_JOINTS, 3):
            raise ValueError("skeleton must have exactly 22 joints")
        if self.parents[0] != -1:
            raise ValueError("joint 0 must be the root")
        for j in range(1, N_JOINTS):
            if not 0 <= self.parents[j] < j:
                raise ValueError(f"joint {j} parent must have a smaller index")
        if not np.all(np.isfinite(offsets)):
            raise ValueError("non-finite rest offset")
        lengths = np.linalg.norm(offsets[1:], axis=-1)
        if np.any(lengths <= 0.0):
            raise ValueError("zero-length bone")


def default_skeleton() -> Skeleton:
    return Skeleton(parents=PARENTS, offsets=np.array(_REST_OFFSETS))


# Fixed body-part groups addressable in edits and prompt constraints.
ARM_JOINTS = frozenset({13, 14, 16, 17, 18, 19, 20, 21})
LEG_JOINTS = frozenset({1, 2, 4, 5, 7, 8, 10, 11})
BODY_GROUPS = {
    "arms": ARM_JOINTS,
    "legs": LEG_JOINTS,
    "upper_body": ARM_JOINTS | {3, 6, 9, 12, 15},
    "lower_body": LEG_JOINTS,
}

# lower_body is the only group that owns the root translation.
GROUPS_WITH_ROOT = frozenset({"lower_body"})


def normalize_group_name(name: str) -> str:
    """Map user-facing group spellings ("upper body") to canonical keys."""
    key = name.strip().lower().replace(" ", "_")
    if key not in BODY_GROUPS:
        raise UnknownBodyPart(f"unknown body part: {name!r}")
    return key
