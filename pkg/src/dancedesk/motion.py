"""Motion clip data model and the motion interchange text format (v1)."""
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import ids, quat
from .errors import InvalidPose, ParseError, SchemaError
from .skeleton import BODY_GROUPS, GROUPS_WITH_ROOT, JOINT_NAMES, N_JOINTS

FPS = 20
MAX_DURATION_S = 600
MAX_FRAMES = MAX_DURATION_S * FPS

PROVENANCE_KINDS = ("generated", "ingested", "extended", "styled", "part_edited", "blended")
_PARENT_COUNT = {
    "generated": 0,
    "ingested": 0,
    "extended": 1,
    "styled": 1,
    "part_edited": 1,
    "blended": 2,
}


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class Provenance:
    kind: str
    prompts: tuple = ()
    parents: tuple = ()
    style: str | None = None
    created_at: str = field(default_factory=utc_now)

    def __post_init__(self):
        object.__setattr__(self, "prompts", tuple(self.prompts))
        object.__setattr__(self, "parents", tuple(self.parents))
        if self.kind not in PROVENANCE_KINDS:
            raise ValueError(f"unknown provenance kind: {self.kind!r}")
        if len(self.parents) != _PARENT_COUNT[self.kind]:
            raise ValueError(
                f"{self.kind} requires {_PARENT_COUNT[self.kind]} parents, got {len(self.parents)}"
            )

    def to_dict(self):
        return {
            "kind": self.kind,
            "prompts": list(self.prompts),
            "parents": list(self.parents),
            "style": self.style,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            prompts=tuple(d.get("prompts", ())),
            parents=tuple(d.get("parents", ())),
            style=d.get("style"),
            created_at=d.get("created_at", utc_now()),
        )


@dataclass(frozen=True)
class Pose:
    """Single-frame state: root translation (m) plus 22 local unit quaternions."""

    root_translation: np.ndarray  # (3,)
    rotations: np.ndarray  # (22, 4) wxyz


@dataclass(frozen=True)
class MotionClip:
    """Fixed-rate skeletal animation with identity and edit lineage.

    `root` is (frames, 3); `quats` is (frames, 22, 4) in (w, x, y, z) order.
    Arrays are frozen read-only at construction.
    """

    root: np.ndarray
    quats: np.ndarray
    provenance: Provenance
    id: str = field(default_factory=ids.new_id)
    fps: int = FPS

    def __post_init__(self):
        root = np.ascontiguousarray(self.root, dtype=np.float64)
        quats = np.ascontiguousarray(self.quats, dtype=np.float64)
        root.setflags(write=False)
        quats.setflags(write=False)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "quats", quats)
        if self.fps != FPS:
            raise ValueError(f"fps must be {FPS}")
        if root.ndim != 2 or root.shape[1] != 3:
            raise ValueError("root must be (frames, 3)")
        n = root.shape[0]
        if quats.shape != (n, N_JOINTS, 4):
            raise ValueError("quats must be (frames, 22, 4)")
        if n < 1:
            raise ValueError("clip needs at least one frame")
        if n > MAX_FRAMES:
            raise ValueError(f"clip exceeds the {MAX_DURATION_S} s safety cap")
        if not (np.all(np.isfinite(root)) and np.all(np.isfinite(quats))):
            raise InvalidPose("non-finite motion data")
        norms = np.linalg.norm(quats, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise InvalidPose("quaternion norm off unit by more than 1e-6")

    @property
    def n_frames(self) -> int:
        return self.root.shape[0]

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.fps

    def pose(self, i: int) -> Pose:
        return Pose(root_translation=self.root[i], rotations=self.quats[i])

    def last_prompt(self) -> str | None:
        return self.provenance.prompts[-1] if self.provenance.prompts else None


def make_clip(root, quats, provenance, clip_id=None):
    """Build a clip, renormalizing quaternions to canonical unit form."""
    q = quat.canonicalize(np.asarray(quats, dtype=np.float64))
    kwargs = {} if clip_id is None else {"id": clip_id}
    return MotionClip(root=np.asarray(root, dtype=np.float64), quats=q, provenance=provenance, **kwargs)


@dataclass(frozen=True)
class BodyPartMask:
    """Per-(frame, joint) known/unknown partition; True means known/frozen."""

    known: np.ndarray  # (frames, 22) bool
    root_known: np.ndarray  # (frames,) bool

    def __post_init__(self):
        known = np.asarray(self.known, dtype=bool)
        root_known = np.asarray(self.root_known, dtype=bool)
        known.setflags(write=False)
        root_known.setflags(write=False)
        object.__setattr__(self, "known", known)
        object.__setattr__(self, "root_known", root_known)
        if known.ndim != 2 or known.shape[1] != N_JOINTS:
            raise ValueError("known must be (frames, 22)")
        if root_known.shape != (known.shape[0],):
            raise ValueError("root_known must be (frames,)")

    @property
    def all_known(self) -> bool:
        return bool(np.all(self.known) and np.all(self.root_known))


def body_mask(group: str, n_frames: int) -> BodyPartMask:
    """Mask that frees the named group's joints over all frames.

    Root translation stays known unless the group is lower_body, which owns
    the global trajectory.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    joints = BODY_GROUPS[group]
    known = np.ones((n_frames, N_JOINTS), dtype=bool)
    known[:, sorted(joints)] = False
    root_known = np.full(n_frames, group not in GROUPS_WITH_ROOT)
    return BodyPartMask(known=known, root_known=root_known)


# ---------------------------------------------------------------------------
# Motion interchange format v1
# ---------------------------------------------------------------------------

def clip_to_document(clip: MotionClip) -> dict:
    return {
        "format_version": "1",
        "id": clip.id,
        "fps": clip.fps,
        "joint_names": list(JOINT_NAMES),
        "frames": [
            {"root": clip.root[i].tolist(), "quats": clip.quats[i].tolist()}
            for i in range(clip.n_frames)
        ],
        "provenance": clip.provenance.to_dict(),
    }


def clip_from_document(doc: dict, fresh_id: bool = False) -> MotionClip:
    """Parse an interchange document at the native 20 fps.

    Ingestion of foreign-rate files goes through exporter.import_motion,
    which resamples before calling this.
    """
    try:
        if doc.get("format_version") != "1":
            raise SchemaError(f"unsupported format_version: {doc.get('format_version')!r}")
        names = doc.get("joint_names", [])
        if len(names) != N_JOINTS:
            raise SchemaError(f"expected {N_JOINTS} joints, got {len(names)}")
        frames = doc["frames"]
        if not frames:
            raise SchemaError("no frames")
        root = np.array([f["root"] for f in frames], dtype=np.float64)
        quats = np.array([f["quats"] for f in frames], dtype=np.float64)
        if quats.shape[1:] != (N_JOINTS, 4):
            raise SchemaError("frame quats must be 22 x 4")
        prov = Provenance.from_dict(doc["provenance"])
        clip_id = ids.new_id() if fresh_id else doc.get("id", ids.new_id())
        return MotionClip(root=root, quats=quats, provenance=prov, id=clip_id)
    except (SchemaError, InvalidPose):
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed interchange document: {exc}") from exc


def dumps_clip(clip: MotionClip) -> str:
    # json round-trips Python floats exactly (repr serialization)
    return json.dumps(clip_to_document(clip))


def loads_clip(text: str, fresh_id: bool = False) -> MotionClip:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("interchange document must be an object")
    return clip_from_document(doc, fresh_id=fresh_id)
