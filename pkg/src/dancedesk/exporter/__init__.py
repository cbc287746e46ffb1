from .gltf import export_gltf
from .ingest import INTERCHANGE_V1, import_motion
from .render import render_frames, render_to_dir, render_thumbnail
from .video import encode_video

__all__ = [
    "export_gltf",
    "INTERCHANGE_V1",
    "import_motion",
    "render_frames",
    "render_to_dir",
    "render_thumbnail",
    "encode_video",
]
