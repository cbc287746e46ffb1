"""glTF 2.0 animation export (embedded-buffer variant).

One scene, 22 nodes mirroring the skeleton tree, one animation with a
rotation channel per joint plus a translation channel for the root.
Quaternions are emitted in glTF's (x, y, z, w) component order; sampler
input timestamps are frame_index / 20 as float32.
"""
import base64
import json
import struct

import numpy as np

from ..errors import EmptyClip
from ..motion import MotionClip
from ..skeleton import JOINT_NAMES, N_JOINTS, Skeleton, default_skeleton

FLOAT = 5126  # GL component type for float32


def export_gltf(clip: MotionClip, skeleton: Skeleton | None = None) -> bytes:
    if clip.n_frames < 1:
        raise EmptyClip("cannot export an empty clip")
    skeleton = skeleton or default_skeleton()
    n = clip.n_frames

    times = (np.arange(n, dtype=np.float32) / np.float32(clip.fps)).astype(np.float32)
    root_out = clip.root.astype(np.float32)
    # wxyz -> xyzw, normalized in float32 to satisfy strict validators
    rot = clip.quats[:, :, [1, 2, 3, 0]].astype(np.float32)
    rot /= np.linalg.norm(rot, axis=-1, keepdims=True).astype(np.float32)

    blob = bytearray()
    views = []
    accessors = []

    def push(data: np.ndarray, acc_type: str, with_minmax: bool):
        raw = data.tobytes()
        views.append({"buffer": 0, "byteOffset": len(blob), "byteLength": len(raw)})
        acc = {
            "bufferView": len(views) - 1,
            "componentType": FLOAT,
            "count": int(data.shape[0]),
            "type": acc_type,
        }
        if with_minmax:
            flat = data.reshape(data.shape[0], -1)
            acc["min"] = [float(v) for v in flat.min(axis=0)]
            acc["max"] = [float(v) for v in flat.max(axis=0)]
        blob.extend(raw)
        accessors.append(acc)
        return len(accessors) - 1

    time_acc = push(times.reshape(n, 1), "SCALAR", with_minmax=True)
    trans_acc = push(root_out, "VEC3", with_minmax=False)
    rot_accs = [push(np.ascontiguousarray(rot[:, j]), "VEC4", with_minmax=False) for j in range(N_JOINTS)]

    nodes = []
    for j, name in enumerate(JOINT_NAMES):
        node = {"name": name, "translation": [float(v) for v in skeleton.offsets[j]]}
        children = [k for k in range(N_JOINTS) if skeleton.parents[k] == j]
        if children:
            node["children"] = children
        nodes.append(node)

    samplers = [{"input": time_acc, "output": trans_acc, "interpolation": "LINEAR"}]
    channels = [{"sampler": 0, "target": {"node": 0, "path": "translation"}}]
    for j in range(N_JOINTS):
        samplers.append({"input": time_acc, "output": rot_accs[j], "interpolation": "LINEAR"})
        channels.append({"sampler": j + 1, "target": {"node": j, "path": "rotation"}})

    doc = {
        "asset": {"version": "2.0", "generator": "dancedesk"},
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": nodes,
        "buffers": [
            {
                "byteLength": len(blob),
                "uri": "data:application/octet-stream;base64," + base64.b64encode(bytes(blob)).decode(),
            }
        ],
        "bufferViews": views,
        "accessors": accessors,
        "animations": [{"name": clip.id, "samplers": samplers, "channels": channels}],
    }
    return json.dumps(doc).encode("utf-8")


_COMPONENT_SIZE = {"SCALAR": 1, "VEC3": 3, "VEC4": 4}


def read_accessor(doc: dict, blob: bytes, index: int) -> np.ndarray:
    """Decode a float32 accessor from a parsed glTF document."""
    acc = doc["accessors"][index]
    view = doc["bufferViews"][acc["bufferView"]]
    width = _COMPONENT_SIZE[acc["type"]]
    start = view.get("byteOffset", 0) + acc.get("byteOffset", 0)
    count = acc["count"] * width
    values = struct.unpack_from(f"<{count}f", blob, start)
    return np.array(values, dtype=np.float32).reshape(acc["count"], width)


def decode_buffer(doc: dict) -> bytes:
    uri = doc["buffers"][0]["uri"]
    prefix = "base64,"
    return base64.b64decode(uri[uri.index(prefix) + len(prefix):])
