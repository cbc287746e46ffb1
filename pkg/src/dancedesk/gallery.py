"""Persistent gallery: one interchange file per clip, a single index
document, and an append-only prompt log.

Layout under the gallery directory:
    index.json    -- entry list, rewritten via write-temp-then-rename
    clips/<id>.json
    thumbs/<id>.png  (optional first-frame renders)
    prompts.log   -- one JSON record per line, append-only

All mutations are serialized through one writer lock; clip files are
immutable once written, so reads need no locking.
"""
import json
import os
import threading
from dataclasses import dataclass, field

from .errors import DuplicateId, NotFound, StorageError
from .motion import MotionClip, dumps_clip, loads_clip, utc_now


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    stored_path: str  # relative to the gallery directory
    caption: str
    created_at: str
    parents: tuple = ()

    def to_dict(self):
        return {
            "id": self.id,
            "stored_path": self.stored_path,
            "caption": self.caption,
            "created_at": self.created_at,
            "parents": list(self.parents),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            id=d["id"],
            stored_path=d["stored_path"],
            caption=d["caption"],
            created_at=d["created_at"],
            parents=tuple(d.get("parents", ())),
        )


@dataclass(frozen=True)
class PromptLogRecord:
    operation: str
    prompts: tuple
    clip_ids: tuple
    timestamp: str = field(default_factory=utc_now)

    def to_dict(self):
        return {
            "timestamp": self.timestamp,
            "operation": self.operation,
            "prompts": list(self.prompts),
            "clip_ids": list(self.clip_ids),
        }


def _caption_for(clip: MotionClip) -> str:
    prov = clip.provenance
    if prov.kind == "styled" and prov.style:
        return f"[{prov.style}] " + (prov.prompts[-1] if prov.prompts else "")
    if prov.prompts:
        return prov.prompts[-1]
    return prov.kind


class Gallery:
    def __init__(self, root):
        self.root = str(root)
        self.clips_dir = os.path.join(self.root, "clips")
        self.index_path = os.path.join(self.root, "index.json")
        self.log_path = os.path.join(self.root, "prompts.log")
        self._lock = threading.Lock()
        os.makedirs(self.clips_dir, exist_ok=True)
        self._entries = self._load_index()

    # -- internal helpers ----------------------------------------------------
    def _load_index(self):
        if not os.path.exists(self.index_path):
            return []
        try:
            with open(self.index_path, encoding="utf-8") as f:
                data = json.load(f)
            return [GalleryEntry.from_dict(d) for d in data["entries"]]
        except (OSError, ValueError, KeyError) as exc:
            raise StorageError(f"cannot load gallery index: {exc}") from exc

    def _write_index(self, entries):
        tmp = self.index_path + ".tmp"
        try:
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump({"entries": [e.to_dict() for e in entries]}, f)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, self.index_path)
        except OSError as exc:
            raise StorageError(f"cannot write gallery index: {exc}") from exc

    # -- public API ----------------------------------------------------------
    def add(self, clip: MotionClip, thumbnail: bool = True) -> GalleryEntry:
        """Persist a clip and update the index atomically."""
        with self._lock:
            if any(e.id == clip.id for e in self._entries):
                raise DuplicateId(f"clip {clip.id} already in gallery")
            rel = os.path.join("clips", f"{clip.id}.json")
            path = os.path.join(self.root, rel)
            try:
                with open(path, "w", encoding="utf-8") as f:
                    f.write(dumps_clip(clip))
                    f.flush()
                    os.fsync(f.fileno())
            except OSError as exc:
                raise StorageError(f"cannot store clip: {exc}") from exc
            if thumbnail:
                self._write_thumbnail(clip)
            entry = GalleryEntry(
                id=clip.id,
                stored_path=rel,
                caption=_caption_for(clip),
                created_at=utc_now(),
                parents=clip.provenance.parents,
            )
            self._write_index(self._entries + [entry])
            self._entries = self._entries + [entry]
            return entry

    def _write_thumbnail(self, clip):
        try:
            from .exporter.render import render_thumbnail

            thumbs = os.path.join(self.root, "thumbs")
            os.makedirs(thumbs, exist_ok=True)
            render_thumbnail(clip, os.path.join(thumbs, f"{clip.id}.png"))
        except Exception:
            # thumbnails are best-effort decoration, never a failure source
            pass

    def get(self, clip_id: str) -> MotionClip:
        entry = self.get_entry(clip_id)
        try:
            with open(os.path.join(self.root, entry.stored_path), encoding="utf-8") as f:
                return loads_clip(f.read())
        except OSError as exc:
            raise StorageError(f"cannot read clip {clip_id}: {exc}") from exc

    def get_entry(self, clip_id: str) -> GalleryEntry:
        for e in self._entries:
            if e.id == clip_id:
                return e
        raise NotFound(f"no gallery entry {clip_id}")

    def list(self):
        """Entries in insertion order."""
        return list(self._entries)

    def log_prompt(self, record: PromptLogRecord) -> None:
        """Append one record to the durable prompt log."""
        with self._lock:
            try:
                with open(self.log_path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(record.to_dict()) + "\n")
                    f.flush()
                    os.fsync(f.fileno())
            except OSError as exc:
                raise StorageError(f"cannot append prompt log: {exc}") from exc

    def read_log(self):
        if not os.path.exists(self.log_path):
            return []
        with open(self.log_path, encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
