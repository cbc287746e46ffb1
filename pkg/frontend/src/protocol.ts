/**
 * Wire-protocol client: JSON request/response envelopes with request_id
 * correlation, plus streaming progress events, over any message transport
 * (a browser WebSocket in the app, a fake or a Node socket in tests).
 */

export interface Transport {
  send(text: string): void;
  /** Register the single inbound-message handler. */
  onMessage(handler: (text: string) => void): void;
  close(): void;
}

export interface ProtocolError {
  code: string;
  message: string;
}

export interface OkResponse {
  request_id: string;
  status: "ok";
  payload: Record<string, unknown>;
}

export interface ErrorResponse {
  request_id: string;
  status: "error";
  error: ProtocolError;
}

export type Response = OkResponse | ErrorResponse;

export interface ProgressEvent {
  request_id: string;
  kind: "progress";
  fraction: number;
}

export class ServerError extends Error {
  readonly code: string;

  constructor(err: ProtocolError) {
    super(err.message);
    this.code = err.code;
  }
}

interface Pending {
  resolve(payload: Record<string, unknown>): void;
  reject(err: Error): void;
  onProgress?: (fraction: number) => void;
}

let counter = 0;

export function nextRequestId(): string {
  counter += 1;
  return `ui-${counter}-${Date.now().toString(36)}`;
}

export class ProtocolClient {
  private readonly pending = new Map<string, Pending>();

  constructor(private readonly transport: Transport) {
    transport.onMessage((text) => this.handleMessage(text));
  }

  /**
   * Issue one request; resolves with the ok payload or rejects with
   * ServerError carrying the protocol error code.
   */
  call(
    op: string,
    params: Record<string, unknown>,
    onProgress?: (fraction: number) => void,
  ): Promise<Record<string, unknown>> {
    const requestId = nextRequestId();
    const envelope = { request_id: requestId, op, params };
    return new Promise((resolve, reject) => {
      this.pending.set(requestId, { resolve, reject, onProgress });
      try {
        this.transport.send(JSON.stringify(envelope));
      } catch (err) {
        this.pending.delete(requestId);
        reject(err instanceof Error ? err : new Error(String(err)));
      }
    });
  }

  /** Number of requests awaiting a terminal response. */
  get inFlight(): number {
    return this.pending.size;
  }

  close(): void {
    const err = new Error("connection closed");
    for (const p of this.pending.values()) p.reject(err);
    this.pending.clear();
    this.transport.close();
  }

  private handleMessage(text: string): void {
    let doc: Record<string, unknown>;
    try {
      doc = JSON.parse(text) as Record<string, unknown>;
    } catch {
      return; // a malformed frame must not break unrelated requests
    }
    const requestId = doc["request_id"];
    if (typeof requestId !== "string") return;
    const entry = this.pending.get(requestId);
    if (!entry) return;
    if (doc["kind"] === "progress") {
      const fraction = doc["fraction"];
      if (typeof fraction === "number") entry.onProgress?.(fraction);
      return; // not terminal: keep the request pending
    }
    this.pending.delete(requestId);
    if (doc["status"] === "ok") {
      entry.resolve((doc["payload"] ?? {}) as Record<string, unknown>);
    } else {
      const raw = doc["error"] as ProtocolError | undefined;
      entry.reject(
        new ServerError(raw ?? { code: "INTERNAL", message: "malformed error response" }),
      );
    }
  }
}

/** Wrap a browser WebSocket as a Transport. */
export function webSocketTransport(ws: {
  send(data: string): void;
  close(): void;
  addEventListener(type: "message", cb: (ev: { data: unknown }) => void): void;
}): Transport {
  let handler: (text: string) => void = () => undefined;
  ws.addEventListener("message", (ev) => {
    if (typeof ev.data === "string") handler(ev.data);
  });
  return {
    send: (text) => ws.send(text),
    onMessage: (cb) => {
      handler = cb;
    },
    close: () => ws.close(),
  };
}
