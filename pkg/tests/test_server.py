import base64
import hashlib
import json
import socket
import struct
import threading
import time

import numpy as np
import pytest

from dancedesk.diffusion import DenoiserConfig, DiffusionEngine, Normalizer, build_denoiser, from_model
from dancedesk.motion import clip_to_document
from dancedesk.server import (
    MAX_FRAME_BYTES,
    DanceDeskServer,
    ProtocolClient,
    clip_from_payload,
    load_config,
)
from dancedesk.synth import generate_clip
from tests.gltf_validator import validate_gltf

CFG = DenoiserConfig(layers=1, width=32, heads=2, max_frames=450, ffn_mult=2)


def _tiny_weights():
    model = build_denoiser(CFG, init_seed=2)
    return from_model(model, Normalizer(np.zeros(91), np.ones(91)))


@pytest.fixture(scope="module")
def weights():
    return _tiny_weights()


@pytest.fixture()
def server(tmp_path, weights):
    srv = DanceDeskServer(
        {"bind_address": "127.0.0.1", "port": 0, "gallery_dir": str(tmp_path / "gal")},
        weights=weights,
    )
    srv.start()
    yield srv
    srv.stop()


@pytest.fixture()
def client(server):
    c = ProtocolClient("127.0.0.1", server.port)
    yield c
    c.close()


def _ok(response):
    assert response["status"] == "ok", response.get("error")
    return response["payload"]


# ---------------------------------------------------------------------------
# basic request/response
# ---------------------------------------------------------------------------

def test_generate_returns_three_inline_clips(client):
    resp, events = client.call("generate", {"prompt": "A man is dancing ballet", "seconds": 2, "seed": 7})
    payload = _ok(resp)
    assert len(payload["clips"]) == 3
    ids = {c["id"] for c in payload["clips"]}
    assert len(ids) == 3
    for entry in payload["clips"]:
        clip = clip_from_payload(entry)
        assert clip.n_frames == 40
        assert clip.id == entry["id"]
    # progress events arrived before the terminal response
    assert [e["kind"] for e in events] == ["progress"] * 3
    assert events[-1]["fraction"] == pytest.approx(1.0)


def test_request_id_echoed_verbatim(client):
    resp, _ = client.call("gallery_list", {}, request_id="my-weird-id-☃")
    assert resp["request_id"] == "my-weird-id-☃"
    _ok(resp)


def test_edit_chain_and_error_codes(client):
    payload = _ok(client.call("generate", {"prompt": "test", "seconds": 2, "seed": 1})[0])
    cid = payload["clips"][0]["id"]

    ext = _ok(client.call("extend", {"id": cid, "seconds": 1, "seed": 3})[0])
    assert ext["document"]["frames"][:40] == payload["clips"][0]["document"]["frames"]

    resp, _ = client.call("extend", {"id": cid, "seconds": 6})
    assert resp["status"] == "error" and resp["error"]["code"] == "EXT_TOO_LONG"

    styled = _ok(client.call("style", {"id": cid, "style": "angry", "seed": 4})[0])
    assert styled["document"]["provenance"]["parents"] == [cid]

    resp, _ = client.call("style", {"id": cid, "style": "bogus"})
    assert resp["error"]["code"] == "UNKNOWN_STYLE"

    resp, _ = client.call("edit_part", {"id": cid, "part": "tail", "text": "wave"})
    assert resp["error"]["code"] == "UNKNOWN_BODY_PART"

    resp, _ = client.call("generate", {"prompt": "  ", "seconds": 2})
    assert resp["error"]["code"] == "EMPTY_PROMPT"

    resp, _ = client.call("extend", {"id": "f" * 32, "seconds": 1})
    assert resp["error"]["code"] == "NOT_FOUND"

    resp, _ = client.call("no_such_op", {})
    assert resp["error"]["code"] == "UNKNOWN_OP"

    resp, _ = client.call("generate", {})  # missing prompt
    assert resp["error"]["code"] == "BAD_PARAM"


def test_degenerate_self_blend_allowed(client):
    payload = _ok(client.call("generate", {"prompt": "test", "seconds": 2, "seed": 1})[0])
    cid = payload["clips"][0]["id"]
    blend = _ok(client.call("blend", {"a": cid, "b": cid, "seed": 9})[0])
    assert blend["document"]["provenance"]["parents"] == [cid, cid]


def test_gallery_ops_and_prompt_log(client, server):
    payload = _ok(client.call("generate", {"prompt": "log me", "seconds": 2, "seed": 5})[0])
    cid = payload["clips"][1]["id"]
    entry = _ok(client.call("gallery_add", {"id": cid})[0])["entry"]
    assert entry["id"] == cid
    listed = _ok(client.call("gallery_list", {})[0])["entries"]
    assert [e["id"] for e in listed] == [cid]
    # completed generate appended to the durable log
    log = server.gallery.read_log()
    assert any(r["operation"] == "generate" and r["prompts"] == ["log me"] for r in log)


def test_upload_and_export(client):
    clip = generate_clip("sway", None, 2, 3)[0]
    doc = json.dumps(clip_to_document(clip))
    up = _ok(client.call("upload_motion", {"data": doc})[0])
    assert up["document"]["provenance"]["kind"] == "ingested"

    exported = _ok(client.call("export_gltf", {"id": up["id"]})[0])
    gltf = base64.b64decode(exported["gltf_base64"])
    validate_gltf(gltf)
    assert exported["filename"].endswith(".gltf")


def test_export_frames(client, tmp_path):
    clip = generate_clip("sway", None, 1, 3)[0]
    up = _ok(client.call("upload_motion", {"data": json.dumps(clip_to_document(clip))})[0])
    out = _ok(client.call("export_frames", {"id": up["id"], "out_dir": str(tmp_path / "fr")})[0])
    assert out["frame_count"] == clip.n_frames


# ---------------------------------------------------------------------------
# protocol robustness
# ---------------------------------------------------------------------------

def _raw_send(sock, data: bytes):
    sock.sendall(struct.pack(">I", len(data)) + data)


def _raw_read(sock):
    header = b""
    while len(header) < 4:
        chunk = sock.recv(4 - len(header))
        if not chunk:
            return None
        header += chunk
    (length,) = struct.unpack(">I", header)
    data = b""
    while len(data) < length:
        chunk = sock.recv(length - len(data))
        if not chunk:
            return None
        data += chunk
    return json.loads(data)


def test_malformed_frame_keeps_connection_open(server):
    sock = socket.create_connection(("127.0.0.1", server.port), timeout=10)
    try:
        _raw_send(sock, b"this is not json")
        resp = _raw_read(sock)
        assert resp["status"] == "error"
        assert resp["error"]["code"] == "PROTO_MALFORMED"
        # connection still usable
        _raw_send(sock, json.dumps({"request_id": "r1", "op": "gallery_list", "params": {}}).encode())
        resp = _raw_read(sock)
        assert resp["request_id"] == "r1" and resp["status"] == "ok"
    finally:
        sock.close()


def test_non_object_json_is_protocol_error(server):
    sock = socket.create_connection(("127.0.0.1", server.port), timeout=10)
    try:
        _raw_send(sock, b"[1, 2, 3]")
        assert _raw_read(sock)["error"]["code"] == "PROTO_MALFORMED"
    finally:
        sock.close()


def test_oversized_frame_closes_connection_with_error(server):
    sock = socket.create_connection(("127.0.0.1", server.port), timeout=10)
    try:
        sock.sendall(struct.pack(">I", MAX_FRAME_BYTES + 1))
        resp = _raw_read(sock)
        assert resp["error"]["code"] == "PROTO_MALFORMED"
        assert _raw_read(sock) is None  # server closed the stream
    finally:
        sock.close()


def test_abrupt_disconnect_mid_request_keeps_server_alive(server):
    sock = socket.create_connection(("127.0.0.1", server.port), timeout=10)
    # half a frame, then vanish
    sock.sendall(struct.pack(">I", 100) + b"partial")
    sock.close()
    time.sleep(0.1)
    # a fresh client still gets service, gallery state intact
    c = ProtocolClient("127.0.0.1", server.port)
    try:
        resp, _ = c.call("gallery_list", {})
        assert resp["status"] == "ok"
    finally:
        c.close()


def test_pipelined_requests_answered_in_order(server):
    """A cheap request pipelined behind an expensive one must not overtake it."""
    sock = socket.create_connection(("127.0.0.1", server.port), timeout=60)
    try:
        a = json.dumps({"request_id": "slow", "op": "generate",
                        "params": {"prompt": "first", "seconds": 2, "seed": 1}}).encode()
        b = json.dumps({"request_id": "fast", "op": "gallery_list", "params": {}}).encode()
        sock.sendall(struct.pack(">I", len(a)) + a + struct.pack(">I", len(b)) + b)
        terminal = []
        while len(terminal) < 2:
            doc = _raw_read(sock)
            if doc.get("kind") == "progress":
                continue
            terminal.append(doc["request_id"])
        assert terminal == ["slow", "fast"]
    finally:
        sock.close()


def test_concurrent_clients_serialize_inference(server):
    """3 clients x 2 pipelined generates: all 12 responses arrive in per-
    connection order and the engine never runs two inferences at once."""
    results = {}

    def worker(name):
        c = ProtocolClient("127.0.0.1", server.port, timeout=600)
        try:
            ids = [c.send_request("generate", {"prompt": f"{name} dance", "seconds": 1, "seed": i},
                                  request_id=f"{name}-{i}") for i in range(2)]
            seen = []
            while len(seen) < 2:
                doc = c.read_document()
                if doc.get("kind") == "progress":
                    continue
                assert doc["status"] == "ok", doc
                seen.append(doc["request_id"])
            results[name] = (ids, seen)
        finally:
            c.close()

    threads = [threading.Thread(target=worker, args=(f"c{i}",)) for i in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=600)
    assert len(results) == 3
    for ids, seen in results.values():
        assert seen == ids  # per-connection order preserved
    assert server.engine.max_concurrent_inferences == 1


# ---------------------------------------------------------------------------
# WebSocket upgrade + static files
# ---------------------------------------------------------------------------

def _ws_handshake(port, path="/"):
    sock = socket.create_connection(("127.0.0.1", port), timeout=30)
    key = base64.b64encode(b"0123456789abcdef").decode()
    sock.sendall(
        (
            f"GET {path} HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\n"
            f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
        ).encode()
    )
    head = b""
    while b"\r\n\r\n" not in head:
        head += sock.recv(4096)
    assert b"101" in head.split(b"\r\n", 1)[0]
    expect = base64.b64encode(
        hashlib.sha1((key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()).digest()
    ).decode()
    assert expect.encode() in head
    return sock


def _ws_send(sock, payload: bytes):
    mask = b"\xaa\xbb\xcc\xdd"
    masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    n = len(payload)
    if n < 126:
        head = bytes([0x81, 0x80 | n])
    else:
        head = bytes([0x81, 0x80 | 126]) + struct.pack(">H", n)
    sock.sendall(head + mask + masked)


def _ws_recv(sock):
    head = sock.recv(2)
    length = head[1] & 0x7F
    if length == 126:
        (length,) = struct.unpack(">H", sock.recv(2))
    elif length == 127:
        (length,) = struct.unpack(">Q", sock.recv(8))
    data = b""
    while len(data) < length:
        data += sock.recv(length - len(data))
    return json.loads(data)


def test_websocket_speaks_same_protocol(server):
    sock = _ws_handshake(server.port)
    try:
        _ws_send(sock, json.dumps({"request_id": "ws1", "op": "gallery_list", "params": {}}).encode())
        resp = _ws_recv(sock)
        assert resp == {"request_id": "ws1", "status": "ok", "payload": {"entries": []}}
    finally:
        sock.close()


def test_static_files_served_from_same_port(tmp_path, weights):
    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html>hello</html>")
    srv = DanceDeskServer(
        {"bind_address": "127.0.0.1", "port": 0, "gallery_dir": str(tmp_path / "gal"),
         "static_dir": str(static)},
        weights=weights,
    )
    srv.start()
    try:
        sock = socket.create_connection(("127.0.0.1", srv.port), timeout=10)
        sock.sendall(b"GET /index.html HTTP/1.1\r\nHost: x\r\n\r\n")
        data = b""
        while True:
            chunk = sock.recv(4096)
            if not chunk:
                break
            data += chunk
        assert data.startswith(b"HTTP/1.1 200")
        assert b"<html>hello</html>" in data
        sock.close()

        # path traversal is refused
        sock = socket.create_connection(("127.0.0.1", srv.port), timeout=10)
        sock.sendall(b"GET /../secret HTTP/1.1\r\nHost: x\r\n\r\n")
        data = sock.recv(4096)
        assert not data.startswith(b"HTTP/1.1 200")
        sock.close()
    finally:
        srv.stop()


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def test_config_file_and_env_overrides(tmp_path, monkeypatch):
    cfg_path = tmp_path / "server.json"
    cfg_path.write_text(json.dumps({"port": 1234, "gallery_dir": "/from/file"}))
    monkeypatch.setenv("DANCEDESK_PORT", "4321")
    monkeypatch.setenv("DANCEDESK_ENCODER_TEMPLATE", "ffmpeg {input_pattern} {output}")
    cfg = load_config(cfg_path)
    assert cfg["port"] == 4321  # env wins over file
    assert cfg["gallery_dir"] == "/from/file"
    assert cfg["encoder_template"] == "ffmpeg {input_pattern} {output}"


def test_port_busy_raises_bind_error(server, tmp_path, weights):
    from dancedesk.errors import BindError

    clash = DanceDeskServer(
        {"bind_address": "127.0.0.1", "port": server.port, "gallery_dir": str(tmp_path / "g2")},
        weights=weights,
    )
    with pytest.raises(BindError):
        clash.start()
