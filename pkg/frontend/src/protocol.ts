// Wire protocol client: one JSON object per message over a WebSocket.
// Requests (id > 0) resolve with their correlated reply; pushes (id 0)
// fan out to registered handlers. The socket implementation is injectable
// so the same client runs in the browser and under node tests.

export interface WireError {
  code: string;
  message: string;
}

export class ProtocolError extends Error {
  code: string;
  constructor(err: WireError) {
    super(err.message);
    this.code = err.code;
  }
}

export interface PushMessage {
  id: 0;
  event: string;
  [key: string]: unknown;
}

// the subset of the WebSocket API the client needs; browser WebSocket and
// the node `ws` package both satisfy it
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

interface Pending {
  resolve: (value: unknown) => void;
  reject: (err: Error) => void;
}

export class WireClient {
  private socket: SocketLike;
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private pushHandlers: Array<(push: PushMessage) => void> = [];
  private closeHandlers: Array<() => void> = [];
  closed = false;

  private constructor(socket: SocketLike) {
    this.socket = socket;
  }

  static connect(url: string, factory?: SocketFactory): Promise<WireClient> {
    const make: SocketFactory =
      factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    return new Promise((resolve, reject) => {
      const socket = make(url);
      const client = new WireClient(socket);
      socket.onopen = () => resolve(client);
      socket.onerror = (ev) => {
        if (!client.closed) reject(new Error(`connection failed: ${ev}`));
      };
      socket.onclose = () => client.handleClose();
      socket.onmessage = (ev) => client.handleMessage(String(ev.data));
    });
  }

  // wrap an already-open socket (used by unit tests with a fake)
  static wrap(socket: SocketLike): WireClient {
    const client = new WireClient(socket);
    socket.onmessage = (ev) => client.handleMessage(String(ev.data));
    socket.onclose = () => client.handleClose();
    return client;
  }

  private handleMessage(text: string) {
    let msg: Record<string, unknown>;
    try {
      msg = JSON.parse(text);
    } catch {
      return; // a server never sends non-JSON; ignore defensively
    }
    const id = msg.id as number;
    if (id && this.pending.has(id)) {
      const entry = this.pending.get(id)!;
      this.pending.delete(id);
      if (msg.error) {
        entry.reject(new ProtocolError(msg.error as WireError));
      } else {
        entry.resolve(msg.result);
      }
      return;
    }
    if (id === 0 && typeof msg.event === "string") {
      for (const handler of this.pushHandlers.slice()) {
        handler(msg as unknown as PushMessage);
      }
    }
  }

  private handleClose() {
    this.closed = true;
    for (const entry of this.pending.values()) {
      entry.reject(new Error("connection closed"));
    }
    this.pending.clear();
    for (const handler of this.closeHandlers.slice()) handler();
  }

  request<T = unknown>(op: string, params: Record<string, unknown> = {}): Promise<T> {
    if (this.closed) return Promise.reject(new Error("connection closed"));
    const id = this.nextId++;
    const promise = new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve: resolve as (v: unknown) => void, reject });
    });
    this.socket.send(JSON.stringify({ id, op, params }));
    return promise;
  }

  onPush(handler: (push: PushMessage) => void): () => void {
    this.pushHandlers.push(handler);
    return () => {
      const i = this.pushHandlers.indexOf(handler);
      if (i >= 0) this.pushHandlers.splice(i, 1);
    };
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.closed = true;
    this.socket.close();
  }
}
