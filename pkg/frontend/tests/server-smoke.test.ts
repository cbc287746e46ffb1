/**
 * Integration smoke: spin up the real protocol server (the `dancedesk` CLI
 * from the sibling Python package) and drive it over a WebSocket exactly the
 * way the browser does — same transport, same ProtocolClient. Runs the
 * non-inference surface (upload, gallery, export, static assets) plus the
 * contract that inference ops report NOT_CONFIGURED when the server has no
 * model weights.
 */
import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { N_JOINTS, parseInterchange } from "../src/interchange.js";
import { ProtocolClient, ServerError, Transport } from "../src/protocol.js";

const STATIC_DIR = resolve(
  join(fileURLToPath(import.meta.url), "..", "..", "static"),
);

let proc: ChildProcess | null = null;
let port = 0;
let galleryDir = "";

function startServer(): Promise<number> {
  galleryDir = mkdtempSync(join(tmpdir(), "dancedesk-ui-test-"));
  proc = spawn("dancedesk", ["serve"], {
    env: {
      ...process.env,
      DANCEDESK_PORT: "0",
      DANCEDESK_BIND_ADDRESS: "127.0.0.1",
      DANCEDESK_GALLERY_DIR: galleryDir,
      DANCEDESK_STATIC_DIR: STATIC_DIR,
    },
    stdio: ["ignore", "pipe", "pipe"],
  });
  return new Promise((resolvePort, reject) => {
    let buffer = "";
    const timer = setTimeout(
      () => reject(new Error(`server never announced a port; output: ${buffer}`)),
      20000,
    );
    proc!.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const line = buffer.split("\n").find((l) => l.includes("listening"));
      if (line) {
        clearTimeout(timer);
        const addr = (JSON.parse(line) as { listening: string }).listening;
        resolvePort(Number(addr.split(":").pop()));
      }
    });
    proc!.on("error", (err) => {
      clearTimeout(timer);
      reject(err);
    });
    proc!.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
  });
}

function connect(): Promise<{ client: ProtocolClient; ws: WebSocket }> {
  return new Promise((resolveConn, reject) => {
    const ws = new WebSocket(`ws://127.0.0.1:${port}/ws`);
    ws.on("error", reject);
    ws.on("open", () => {
      let handler: (text: string) => void = () => undefined;
      ws.on("message", (data) => handler(data.toString()));
      const transport: Transport = {
        send: (text) => ws.send(text),
        onMessage: (cb) => {
          handler = cb;
        },
        close: () => ws.close(),
      };
      resolveConn({ client: new ProtocolClient(transport), ws });
    });
  });
}

function interchangeDoc(nFrames: number): Record<string, unknown> {
  const jointNames = [
    "pelvis", "l_hip", "r_hip", "spine1", "l_knee", "r_knee", "spine2",
    "l_ankle", "r_ankle", "spine3", "l_foot", "r_foot", "neck", "l_collar",
    "r_collar", "head", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow",
    "l_wrist", "r_wrist",
  ];
  const frames = Array.from({ length: nFrames }, (_, i) => {
    const angle = 0.4 * Math.sin((2 * Math.PI * i) / 20);
    const quats = Array.from({ length: N_JOINTS }, () => [1, 0, 0, 0]);
    quats[16] = [Math.cos(angle / 2), 0, 0, Math.sin(angle / 2)];
    return { root: [0, 0.95 + 0.01 * Math.sin(i / 5), 0], quats };
  });
  return {
    format_version: "1",
    fps: 20,
    joint_names: jointNames,
    frames,
    provenance: { kind: "ingested", prompts: [], parents: [], style: null },
  };
}

describe("against the real server", () => {
  beforeAll(async () => {
    port = await startServer();
  }, 30000);

  afterAll(() => {
    proc?.kill();
    if (galleryDir) rmSync(galleryDir, { recursive: true, force: true });
  });

  it("upload, gallery round-trip, and export work end to end", async () => {
    const { client } = await connect();
    try {
      const empty = await client.call("gallery_list", {});
      expect(empty["entries"]).toEqual([]);

      const uploaded = await client.call("upload_motion", {
        data: JSON.stringify(interchangeDoc(40)),
      });
      const doc = parseInterchange(uploaded["document"]);
      expect(doc.frames).toHaveLength(40);
      expect(doc.fps).toBe(20);

      await client.call("gallery_add", { id: doc.id });
      const listed = await client.call("gallery_list", {});
      const entries = listed["entries"] as Array<{ id: string }>;
      expect(entries).toHaveLength(1);
      expect(entries[0].id).toBe(doc.id);

      const exported = await client.call("export_gltf", { id: doc.id });
      expect(exported["filename"]).toBe(`${doc.id}.gltf`);
      const gltf = JSON.parse(
        Buffer.from(exported["gltf_base64"] as string, "base64").toString(),
      ) as { asset: { version: string }; nodes: unknown[]; animations: unknown[] };
      expect(gltf.asset.version).toBe("2.0");
      expect(gltf.nodes).toHaveLength(22);
      expect(gltf.animations).toHaveLength(1);
    } finally {
      client.close();
    }
  });

  it("inference ops surface NOT_CONFIGURED when no weights are loaded", async () => {
    const { client } = await connect();
    try {
      await expect(
        client.call("generate", { prompt: "a man is dancing ballet" }),
      ).rejects.toMatchObject({ code: "NOT_CONFIGURED" });
    } finally {
      client.close();
    }
  });

  it("unknown ops and missing clips map to their protocol codes", async () => {
    const { client } = await connect();
    try {
      await expect(client.call("no_such_op", {})).rejects.toMatchObject({
        code: "UNKNOWN_OP",
      });
      await expect(
        client.call("export_gltf", { id: "missing-clip" }),
      ).rejects.toMatchObject({ code: "NOT_FOUND" });
      const bad = await client
        .call("upload_motion", { data: "{not json" })
        .catch((e: ServerError) => e);
      expect(bad).toBeInstanceOf(ServerError);
    } finally {
      client.close();
    }
  });

  it("pipelined requests on one socket all come back correlated", async () => {
    const { client } = await connect();
    try {
      const results = await Promise.all(
        Array.from({ length: 5 }, () => client.call("gallery_list", {})),
      );
      for (const r of results) expect(Array.isArray(r["entries"])).toBe(true);
    } finally {
      client.close();
    }
  });

  it("serves the UI's static assets from the same origin", async () => {
    const res = await fetch(`http://127.0.0.1:${port}/index.html`);
    expect(res.status).toBe(200);
    const body = await res.text();
    expect(body).toContain("<canvas id=\"viewport\"");
    const css = await fetch(`http://127.0.0.1:${port}/styles.css`);
    expect(css.status).toBe(200);
    const missing = await fetch(`http://127.0.0.1:${port}/nope.html`);
    expect(missing.status).toBe(404);
  });
});
