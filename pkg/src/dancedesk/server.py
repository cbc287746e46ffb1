"""Framed-message TCP server dispatching edit, gallery and export operations.

Wire format
-----------
Native clients speak length-prefixed JSON: a 4-byte big-endian length
followed by one JSON document, both directions.  Browsers connect to the
same port with an HTTP WebSocket upgrade; each WebSocket message then
carries one JSON document (the socket's own framing replaces the length
prefix).  Plain HTTP GETs on the port serve static files from the
configured directory, so the web UI and its socket share one origin.

Message shapes:
    request   {"request_id": str, "op": str, "params": {...}}
    response  {"request_id": str, "status": "ok", "payload": {...}}
              {"request_id": str, "status": "error",
               "error": {"code": str, "message": str}}
    event     {"request_id": str, "kind": "progress", "fraction": float}

Every request gets exactly one terminal response, in request order per
connection.  Inference-bearing ops serialize through one global lock.
"""
import base64
import hashlib
import json
import mimetypes
import os
import socket
import struct
import threading

from .diffusion import DiffusionEngine, load_weights
from .edits import apply_style, blend_dances, edit_body_part, extend_dance, generate_dance
from .errors import BindError, DanceDeskError, NotConfigured, NotFound, ParseError
from .exporter.gltf import export_gltf
from .exporter.ingest import INTERCHANGE_V1, import_motion
from .exporter.render import render_to_dir
from .exporter.video import encode_video
from .gallery import Gallery, PromptLogRecord
from .motion import MotionClip, clip_to_document, loads_clip

MAX_FRAME_BYTES = 64 * 1024 * 1024
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

# ops that run the diffusion model and therefore take the inference lock
INFERENCE_OPS = frozenset({"generate", "extend", "style", "edit_part", "blend"})
# ops whose completion appends to the durable prompt log
LOGGED_OPS = frozenset({"generate", "extend", "style", "edit_part", "blend"})

ENV_PREFIX = "DANCEDESK_"
_CONFIG_KEYS = ("bind_address", "port", "weights_path", "gallery_dir", "encoder_template", "static_dir")


def load_config(path=None) -> dict:
    """Config file keys, overridden by DANCEDESK_* environment variables."""
    config = {"bind_address": "127.0.0.1", "port": 7631, "weights_path": None,
              "gallery_dir": None, "encoder_template": None, "static_dir": None}
    if path is not None:
        with open(path, encoding="utf-8") as f:
            loaded = json.load(f)
        for key in _CONFIG_KEYS:
            if key in loaded:
                config[key] = loaded[key]
    for key in _CONFIG_KEYS:
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            config[key] = int(env) if key == "port" else env
    return config


class _Connection:
    """One client socket; owns all writes to it."""

    def __init__(self, sock):
        self.sock = sock
        self.write_lock = threading.Lock()
        self.is_websocket = False

    # -- receiving ---------------------------------------------------------
    def _recv_exact(self, n: int):
        buf = b""
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                return None
            buf += chunk
        return buf

    def read_message(self):
        """One inbound JSON document, or None on clean EOF.

        Raises ParseError for malformed payloads (connection stays open) and
        OversizedFrame-style ConnectionError semantics via ValueError for
        frames the protocol refuses to buffer.
        """
        if self.is_websocket:
            data = self._read_ws_message()
        else:
            header = self._recv_exact(4)
            if header is None:
                return None
            (length,) = struct.unpack(">I", header)
            if length > MAX_FRAME_BYTES:
                raise OversizedFrame(f"frame of {length} bytes exceeds the 64 MiB limit")
            data = self._recv_exact(length)
        if data is None:
            return None
        try:
            doc = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"malformed frame: {exc}") from exc
        if not isinstance(doc, dict):
            raise ParseError("frame must contain a JSON object")
        return doc

    def _read_ws_message(self):
        """Reassemble one masked client message; handles ping/close inline."""
        message = b""
        while True:
            head = self._recv_exact(2)
            if head is None:
                return None
            fin = head[0] & 0x80
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                (length,) = struct.unpack(">H", self._recv_exact(2) or b"\0\0")
            elif length == 127:
                (length,) = struct.unpack(">Q", self._recv_exact(8) or b"\0" * 8)
            if length > MAX_FRAME_BYTES:
                raise OversizedFrame(f"socket message of {length} bytes exceeds the 64 MiB limit")
            mask = self._recv_exact(4) if masked else b"\0\0\0\0"
            payload = self._recv_exact(length) if length else b""
            if mask is None or payload is None:
                return None
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:  # close
                self._send_ws_frame(0x8, payload[:2])
                return None
            if opcode == 0x9:  # ping
                self._send_ws_frame(0xA, payload)
                continue
            if opcode == 0xA:  # pong
                continue
            message += payload
            if fin:
                return message

    # -- sending -----------------------------------------------------------
    def send_document(self, doc: dict) -> None:
        data = json.dumps(doc).encode("utf-8")
        with self.write_lock:
            if self.is_websocket:
                self._send_ws_frame(0x1, data)
            else:
                self.sock.sendall(struct.pack(">I", len(data)) + data)

    def _send_ws_frame(self, opcode: int, payload: bytes) -> None:
        head = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            head += bytes([n])
        elif n < 1 << 16:
            head += bytes([126]) + struct.pack(">H", n)
        else:
            head += bytes([127]) + struct.pack(">Q", n)
        self.sock.sendall(head + payload)


class OversizedFrame(ValueError):
    pass


class DanceDeskServer:
    """Accepts connections, keeps per-connection ordering, serializes inference."""

    def __init__(self, config: dict, weights=None):
        self.config = dict(config)
        if weights is None and config.get("weights_path"):
            weights = load_weights(config["weights_path"])
        self.engine = DiffusionEngine(weights) if weights is not None else None
        self.gallery = Gallery(config["gallery_dir"]) if config.get("gallery_dir") else None
        self.inference_lock = threading.Lock()
        self._clips = {}  # every clip this process has produced or loaded, by id
        self._clips_lock = threading.Lock()
        self._sock = None
        self._threads = []
        self._shutdown = threading.Event()
        self.port = None

    # -- lifecycle -----------------------------------------------------------
    def start(self) -> int:
        """Bind and begin accepting in a background thread; returns the port."""
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((self.config["bind_address"], int(self.config["port"])))
        except OSError as exc:
            sock.close()
            raise BindError(f"cannot bind {self.config['bind_address']}:{self.config['port']}: {exc}") from exc
        sock.listen(16)
        self._sock = sock
        self.port = sock.getsockname()[1]
        t = threading.Thread(target=self._accept_loop, name="dancedesk-accept", daemon=True)
        t.start()
        self._threads.append(t)
        return self.port

    def serve_forever(self) -> None:
        if self._sock is None:
            self.start()
        self._shutdown.wait()

    def stop(self) -> None:
        self._shutdown.set()
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass

    def _accept_loop(self):
        while not self._shutdown.is_set():
            try:
                client, _ = self._sock.accept()
            except OSError:
                return
            t = threading.Thread(target=self._serve_connection, args=(client,), daemon=True)
            t.start()
            self._threads.append(t)

    # -- connection handling ---------------------------------------------------
    def _serve_connection(self, sock):
        conn = _Connection(sock)
        try:
            first = conn._recv_exact(4)
            if first is None:
                return
            if first in (b"GET ", b"HEAD", b"POST", b"PUT ", b"OPTI"):
                if not self._handle_http(conn, first):
                    return  # plain HTTP request, already answered and closed
            else:
                (length,) = struct.unpack(">I", first)
                if length > MAX_FRAME_BYTES:
                    self._send_protocol_error(conn, None, "oversized frame")
                    return
                data = conn._recv_exact(length)
                if data is None:
                    return
                self._handle_raw(conn, data)
            self._request_loop(conn)
        except (OSError, ConnectionError):
            pass  # abrupt disconnect: nothing to clean up, state lives elsewhere
        finally:
            try:
                sock.close()
            except OSError:
                pass

    def _handle_raw(self, conn, data: bytes) -> None:
        try:
            doc = json.loads(data.decode("utf-8"))
            if not isinstance(doc, dict):
                raise ParseError("frame must contain a JSON object")
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._send_protocol_error(conn, None, f"malformed frame: {exc}")
            return
        except ParseError as exc:
            self._send_protocol_error(conn, None, str(exc))
            return
        self._process(conn, doc)

    def _request_loop(self, conn):
        while not self._shutdown.is_set():
            try:
                doc = conn.read_message()
            except OversizedFrame as exc:
                # the stream cannot be resynchronized; report and close
                self._send_protocol_error(conn, None, str(exc))
                return
            except ParseError as exc:
                self._send_protocol_error(conn, None, str(exc))
                continue
            if doc is None:
                return
            self._process(conn, doc)

    def _send_protocol_error(self, conn, request_id, message):
        try:
            conn.send_document({
                "request_id": request_id,
                "status": "error",
                "error": {"code": "PROTO_MALFORMED", "message": message},
            })
        except (OSError, ConnectionError):
            pass

    # -- HTTP / WebSocket --------------------------------------------------------
    def _handle_http(self, conn, prefix: bytes) -> bool:
        """Returns True if the connection was upgraded to a WebSocket."""
        data = prefix
        while b"\r\n\r\n" not in data and len(data) < 65536:
            chunk = conn.sock.recv(4096)
            if not chunk:
                return False
            data += chunk
        head = data.split(b"\r\n\r\n", 1)[0].decode("latin-1")
        lines = head.split("\r\n")
        try:
            method, path, _ = lines[0].split(" ", 2)
        except ValueError:
            return False
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                k, v = line.split(":", 1)
                headers[k.strip().lower()] = v.strip()

        if headers.get("upgrade", "").lower() == "websocket" and "sec-websocket-key" in headers:
            accept = base64.b64encode(
                hashlib.sha1((headers["sec-websocket-key"] + _WS_GUID).encode()).digest()
            ).decode()
            conn.sock.sendall(
                (
                    "HTTP/1.1 101 Switching Protocols\r\n"
                    "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                    f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
                ).encode()
            )
            conn.is_websocket = True
            return True

        self._serve_static(conn, method, path)
        return False

    def _serve_static(self, conn, method, path):
        def respond(status, body=b"", ctype="text/plain; charset=utf-8"):
            head = (
                f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n"
            ).encode()
            conn.sock.sendall(head if method == "HEAD" else head + body)

        root = self.config.get("static_dir")
        if method not in ("GET", "HEAD") or not root:
            respond("404 Not Found", b"not found")
            return
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(root, rel))
        if not full.startswith(os.path.realpath(root) + os.sep) and full != os.path.realpath(root):
            respond("403 Forbidden", b"forbidden")
            return
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            respond("404 Not Found", b"not found")
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as f:
            respond("200 OK", f.read(), ctype)

    # -- dispatch -------------------------------------------------------------
    def _process(self, conn, doc: dict) -> None:
        request_id = doc.get("request_id")
        op = doc.get("op")
        if not isinstance(request_id, str) or not isinstance(op, str):
            self._send_protocol_error(conn, request_id if isinstance(request_id, str) else None,
                                      "request needs string request_id and op")
            return
        params = doc.get("params") or {}

        def progress(fraction):
            try:
                conn.send_document({"request_id": request_id, "kind": "progress",
                                    "fraction": float(fraction)})
            except (OSError, ConnectionError):
                pass

        try:
            handler = getattr(self, f"_op_{op}", None)
            if handler is None:
                raise UnknownOp(f"unknown op: {op!r}")
            if op in INFERENCE_OPS:
                if self.engine is None:
                    raise NotConfigured("server started without model weights")
                with self.inference_lock:
                    payload = handler(params, progress)
            else:
                payload = handler(params, progress)
            response = {"request_id": request_id, "status": "ok", "payload": payload}
        except DanceDeskError as exc:
            response = {"request_id": request_id, "status": "error",
                        "error": {"code": exc.code, "message": str(exc)}}
        except UnknownOp as exc:
            response = {"request_id": request_id, "status": "error",
                        "error": {"code": "UNKNOWN_OP", "message": str(exc)}}
        except (KeyError, TypeError, ValueError) as exc:
            response = {"request_id": request_id, "status": "error",
                        "error": {"code": "BAD_PARAM", "message": f"{type(exc).__name__}: {exc}"}}
        except Exception as exc:  # noqa: BLE001 -- the server must never crash
            response = {"request_id": request_id, "status": "error",
                        "error": {"code": "INTERNAL", "message": f"{type(exc).__name__}: {exc}"}}
        try:
            conn.send_document(response)
        except (OSError, ConnectionError):
            pass

    # -- clip registry ----------------------------------------------------------
    def _register(self, clip: MotionClip) -> MotionClip:
        with self._clips_lock:
            self._clips[clip.id] = clip
        return clip

    def _resolve(self, clip_id) -> MotionClip:
        if not isinstance(clip_id, str):
            raise ParseError(f"clip id must be a string, got {type(clip_id).__name__}")
        with self._clips_lock:
            clip = self._clips.get(clip_id)
        if clip is not None:
            return clip
        if self.gallery is not None:
            return self._register(self.gallery.get(clip_id))
        raise NotFound(f"unknown clip id {clip_id}")

    def _log(self, operation, prompts, clip_ids):
        if self.gallery is not None:
            self.gallery.log_prompt(PromptLogRecord(
                operation=operation, prompts=tuple(prompts), clip_ids=tuple(clip_ids)))

    @staticmethod
    def _clip_payload(clip: MotionClip) -> dict:
        return {"id": clip.id, "document": clip_to_document(clip)}

    # -- op handlers --------------------------------------------------------------
    def _op_generate(self, params, progress):
        result = generate_dance(self.engine, params["prompt"], float(params.get("seconds", 5.0)),
                                int(params.get("seed", 0)))
        clips = []
        for i, clip in enumerate(result.clips):
            self._register(clip)
            clips.append(self._clip_payload(clip))
            progress((i + 1) / len(result.clips))
        self._log("generate", [result.prompt], [c.id for c in result.clips])
        return {"clips": clips}

    def _op_extend(self, params, progress):
        source = self._resolve(params["id"])
        progress(0.0)
        clip = self._register(extend_dance(self.engine, source, float(params["seconds"]),
                                           int(params.get("seed", 0))))
        self._log("extend", clip.provenance.prompts, [clip.id])
        return self._clip_payload(clip)

    def _op_style(self, params, progress):
        source = self._resolve(params["id"])
        progress(0.0)
        t_edit = params.get("t_edit")
        clip = self._register(apply_style(self.engine, source, params["style"],
                                          int(params.get("seed", 0)),
                                          t_edit=None if t_edit is None else int(t_edit)))
        self._log("style", [params["style"]], [clip.id])
        return self._clip_payload(clip)

    def _op_edit_part(self, params, progress):
        source = self._resolve(params["id"])
        progress(0.0)
        clip = self._register(edit_body_part(self.engine, source, params["part"],
                                             params["text"], int(params.get("seed", 0))))
        self._log("edit_part", [params["text"]], [clip.id])
        return self._clip_payload(clip)

    def _op_blend(self, params, progress):
        a, b = self._resolve(params["a"]), self._resolve(params["b"])
        progress(0.0)
        clip = self._register(blend_dances(self.engine, a, b, int(params.get("seed", 0))))
        self._log("blend", clip.provenance.prompts, [clip.id])
        return self._clip_payload(clip)

    def _op_upload_motion(self, params, progress):
        clip = self._register(import_motion(params["data"],
                                            params.get("format", INTERCHANGE_V1)))
        return self._clip_payload(clip)

    def _op_gallery_list(self, params, progress):
        if self.gallery is None:
            raise NotConfigured("server started without a gallery directory")
        return {"entries": [e.to_dict() for e in self.gallery.list()]}

    def _op_gallery_add(self, params, progress):
        if self.gallery is None:
            raise NotConfigured("server started without a gallery directory")
        entry = self.gallery.add(self._resolve(params["id"]))
        return {"entry": entry.to_dict()}

    def _op_export_gltf(self, params, progress):
        clip = self._resolve(params["id"])
        data = export_gltf(clip)
        return {"id": clip.id, "gltf_base64": base64.b64encode(data).decode("ascii"),
                "filename": f"{clip.id}.gltf"}

    def _op_export_frames(self, params, progress):
        clip = self._resolve(params["id"])
        out_dir = params["out_dir"]
        paths = render_to_dir(clip, out_dir)
        payload = {"id": clip.id, "frame_count": len(paths), "out_dir": str(out_dir)}
        if params.get("encode"):
            video_path = params.get("video_path") or os.path.join(out_dir, f"{clip.id}.mp4")
            encode_video(out_dir, video_path, template=self.config.get("encoder_template"))
            payload["video_path"] = str(video_path)
        return payload


class UnknownOp(Exception):
    pass


# -- minimal blocking client (used by the CLI, tests, and replay tooling) ------
class ProtocolClient:
    """Length-prefixed framing client; collects events until the response."""

    def __init__(self, host, port, timeout=300.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self._counter = 0

    def close(self):
        self.sock.close()

    def send_request(self, op, params, request_id=None) -> str:
        if request_id is None:
            self._counter += 1
            request_id = f"req-{self._counter}"
        data = json.dumps({"request_id": request_id, "op": op, "params": params}).encode()
        self.sock.sendall(struct.pack(">I", len(data)) + data)
        return request_id

    def read_document(self) -> dict:
        header = b""
        while len(header) < 4:
            chunk = self.sock.recv(4 - len(header))
            if not chunk:
                raise ConnectionError("server closed the connection")
            header += chunk
        (length,) = struct.unpack(">I", header)
        data = b""
        while len(data) < length:
            chunk = self.sock.recv(length - len(data))
            if not chunk:
                raise ConnectionError("server closed the connection")
            data += chunk
        return json.loads(data.decode("utf-8"))

    def call(self, op, params, request_id=None):
        """Send one request and block until its terminal response.

        Returns (response, events).
        """
        request_id = self.send_request(op, params, request_id)
        events = []
        while True:
            doc = self.read_document()
            if doc.get("kind") == "progress":
                events.append(doc)
                continue
            if doc.get("request_id") != request_id:
                raise ConnectionError(f"response for unexpected request {doc.get('request_id')!r}")
            return doc, events


def clip_from_payload(payload: dict) -> MotionClip:
    """Rebuild a MotionClip from a response's inline interchange document."""
    return loads_clip(json.dumps(payload["document"]))
