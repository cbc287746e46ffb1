"""Motion ingestion from interchange files (the system's upload path).

External pose-estimation tools plug in by emitting interchange documents;
foreign frame rates are resampled to 20 fps by nearest-frame selection.
"""
import json

import numpy as np

from ..errors import ParseError, SchemaError
from ..motion import FPS, Provenance, make_clip
from ..skeleton import N_JOINTS

INTERCHANGE_V1 = "interchange-v1"


def import_motion(data, declared_format: str = INTERCHANGE_V1):
    """Parse, validate and resample an uploaded motion document.

    Returns a fresh-id MotionClip with provenance kind "ingested".
    """
    if declared_format != INTERCHANGE_V1:
        raise SchemaError(f"unsupported format: {declared_format!r}")
    try:
        if isinstance(data, bytes):
            data = data.decode("utf-8", errors="strict")
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid interchange document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("interchange document must be an object")
    if doc.get("format_version") != "1":
        raise SchemaError(f"unsupported format_version: {doc.get('format_version')!r}")
    names = doc.get("joint_names", [])
    if len(names) != N_JOINTS:
        raise SchemaError(f"expected {N_JOINTS} joints, got {len(names)}")
    frames = doc.get("frames") or []
    if not frames:
        raise SchemaError("no frames")
    try:
        src_fps = float(doc.get("fps", FPS))
        root = np.array([f["root"] for f in frames], dtype=np.float64)
        quats = np.array([f["quats"] for f in frames], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed frames: {exc}") from exc
    if quats.ndim != 3 or quats.shape[1:] != (N_JOINTS, 4):
        raise SchemaError("frame quats must be 22 x 4")
    if src_fps <= 0:
        raise SchemaError(f"fps must be positive, got {src_fps}")

    if src_fps != FPS:
        n_src = root.shape[0]
        n_out = max(1, int(round(n_src * FPS / src_fps)))
        idx = np.minimum(np.round(np.arange(n_out) * src_fps / FPS).astype(int), n_src - 1)
        root, quats = root[idx], quats[idx]

    prompts = tuple(doc.get("provenance", {}).get("prompts", ()))
    return make_clip(root, quats, Provenance(kind="ingested", prompts=prompts))
