import { describe, expect, it } from "vitest";

import { ProtocolClient, ServerError, Transport } from "../src/protocol.js";

/** In-memory transport that records outbound frames and lets tests inject replies. */
function fakeTransport() {
  const sent: Array<Record<string, unknown>> = [];
  let deliver: (text: string) => void = () => undefined;
  const transport: Transport = {
    send: (text) => sent.push(JSON.parse(text) as Record<string, unknown>),
    onMessage: (cb) => {
      deliver = cb;
    },
    close: () => undefined,
  };
  return { transport, sent, inject: (doc: unknown) => deliver(JSON.stringify(doc)) };
}

describe("request correlation", () => {
  it("sends the spec envelope: request_id, op, params", async () => {
    const { transport, sent, inject } = fakeTransport();
    const client = new ProtocolClient(transport);
    const promise = client.call("gallery_list", {});
    expect(sent).toHaveLength(1);
    expect(typeof sent[0].request_id).toBe("string");
    expect(sent[0].op).toBe("gallery_list");
    expect(sent[0].params).toEqual({});
    inject({ request_id: sent[0].request_id, status: "ok", payload: { entries: [] } });
    await expect(promise).resolves.toEqual({ entries: [] });
  });

  it("matches out-of-order responses to the right requests", async () => {
    const { transport, sent, inject } = fakeTransport();
    const client = new ProtocolClient(transport);
    const first = client.call("generate", { prompt: "a" });
    const second = client.call("generate", { prompt: "b" });
    expect(client.inFlight).toBe(2);
    inject({ request_id: sent[1].request_id, status: "ok", payload: { which: "b" } });
    inject({ request_id: sent[0].request_id, status: "ok", payload: { which: "a" } });
    await expect(first).resolves.toEqual({ which: "a" });
    await expect(second).resolves.toEqual({ which: "b" });
    expect(client.inFlight).toBe(0);
  });

  it("surfaces error responses as ServerError with the protocol code", async () => {
    const { transport, sent, inject } = fakeTransport();
    const client = new ProtocolClient(transport);
    const promise = client.call("style", { id: "x", style: "bogus" });
    inject({
      request_id: sent[0].request_id,
      status: "error",
      error: { code: "UNKNOWN_STYLE", message: "no style named bogus" },
    });
    await expect(promise).rejects.toMatchObject({ code: "UNKNOWN_STYLE" });
    await expect(promise).rejects.toBeInstanceOf(ServerError);
  });

  it("routes progress events without settling the request", async () => {
    const { transport, sent, inject } = fakeTransport();
    const client = new ProtocolClient(transport);
    const fractions: number[] = [];
    const promise = client.call("generate", { prompt: "x" }, (f) => fractions.push(f));
    inject({ request_id: sent[0].request_id, kind: "progress", fraction: 1 / 3 });
    inject({ request_id: sent[0].request_id, kind: "progress", fraction: 2 / 3 });
    expect(client.inFlight).toBe(1);
    inject({ request_id: sent[0].request_id, kind: "progress", fraction: 1 });
    inject({ request_id: sent[0].request_id, status: "ok", payload: {} });
    await promise;
    expect(fractions).toEqual([1 / 3, 2 / 3, 1]);
  });

  it("ignores frames for unknown or already-settled requests", async () => {
    const { transport, sent, inject } = fakeTransport();
    const client = new ProtocolClient(transport);
    const promise = client.call("gallery_list", {});
    inject({ request_id: "nobody-asked", status: "ok", payload: {} });
    inject("not even json {");
    inject({ request_id: sent[0].request_id, status: "ok", payload: { entries: [] } });
    inject({ request_id: sent[0].request_id, status: "ok", payload: { entries: [1] } });
    await expect(promise).resolves.toEqual({ entries: [] });
  });

  it("rejects all pending requests when the connection closes", async () => {
    const { transport } = fakeTransport();
    const client = new ProtocolClient(transport);
    const promise = client.call("generate", { prompt: "x" });
    client.close();
    await expect(promise).rejects.toThrow("connection closed");
    expect(client.inFlight).toBe(0);
  });

  it("uses unique request ids across calls", () => {
    const { transport, sent } = fakeTransport();
    const client = new ProtocolClient(transport);
    for (let i = 0; i < 50; i += 1) void client.call("gallery_list", {}).catch(() => undefined);
    const ids = new Set(sent.map((s) => s.request_id));
    expect(ids.size).toBe(50);
    client.close();
  });
});

describe("ServerError", () => {
  it("carries code and message", () => {
    const err = new ServerError({ code: "EXT_TOO_LONG", message: "cap is 5 s" });
    expect(err.code).toBe("EXT_TOO_LONG");
    expect(err.message).toBe("cap is 5 s");
  });
});
