/**
 * Client side of the session wire protocol, transport-agnostic.
 *
 * The core is sans-IO: it receives parsed JSON messages through
 * `receive` and emits outbound messages through the `send` callback, so
 * the same logic runs over a browser WebSocket or a test harness. Local
 * edits apply to the mirror immediately; at most one op is in flight,
 * the rest queue and rebase whenever a remote op lands.
 */

import {
  applyComponents,
  Component,
  fromWire,
  textDiff,
  toWire,
  transformComponents,
  WireComponent,
} from "./ot.js";

export interface WelcomeMessage {
  type: "welcome";
  cid: string;
  doc: string;
  version: number;
}

export interface OpMessage {
  type: "op";
  version: number;
  ops: WireComponent[];
  cid: string;
}

export interface EvalMessage {
  type: "eval";
  version: number;
  errors: { line: number; col: number; message: string }[];
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage = WelcomeMessage | OpMessage | EvalMessage | ErrorMessage;

export interface SessionEvents {
  /** document changed (remote edit applied or welcome sync) */
  onDocChange?: (doc: string) => void;
  onWelcome?: (msg: WelcomeMessage) => void;
  onEval?: (msg: EvalMessage) => void;
  onError?: (msg: ErrorMessage) => void;
}

export class SessionCore {
  doc = "";
  version = 0;
  cid: string | null = null;
  pending: Component[][] = [];
  inFlight = false;

  constructor(
    private send: (msg: object) => void,
    private name: string,
    private events: SessionEvents = {},
  ) {}

  hello(): void {
    this.send({ type: "hello", name: this.name });
  }

  /** Apply a local edit immediately and queue it for the server. */
  edit(components: Component[]): void {
    this.doc = applyComponents(this.doc, components);
    this.pending.push(components);
    this.flush();
    this.events.onDocChange?.(this.doc);
  }

  /** Convenience: edit by replacing the whole buffer text. */
  setText(text: string): void {
    const diff = textDiff(this.doc, text);
    if (diff !== null) this.edit(diff);
  }

  requestEval(): void {
    this.send({ type: "eval", base: this.version });
  }

  get idle(): boolean {
    return this.pending.length === 0;
  }

  private flush(): void {
    if (this.inFlight || this.pending.length === 0 || this.cid === null) return;
    this.inFlight = true;
    this.send({
      type: "op",
      base: this.version,
      ops: toWire(this.pending[0]),
      cid: this.cid,
    });
  }

  receive(msg: ServerMessage): void {
    switch (msg.type) {
      case "welcome": {
        this.cid = msg.cid;
        // a reconnect resynchronizes from the server's copy wholesale
        this.doc = msg.doc;
        this.version = msg.version;
        this.pending = [];
        this.inFlight = false;
        this.events.onWelcome?.(msg);
        this.events.onDocChange?.(this.doc);
        return;
      }
      case "op": {
        if (msg.version !== this.version + 1) {
          throw new Error(
            `out of order: got version ${msg.version}, expected ${this.version + 1}`,
          );
        }
        this.version = msg.version;
        if (msg.cid === this.cid) {
          // echo of our own op: already applied locally, just advance
          this.pending.shift();
          this.inFlight = false;
          this.flush();
          return;
        }
        let remote = fromWire(msg.ops);
        const oursFirst = (this.cid ?? "") <= msg.cid;
        for (let i = 0; i < this.pending.length; i += 1) {
          const [ours, theirs] = transformComponents(this.pending[i], remote, oursFirst);
          this.pending[i] = ours;
          remote = theirs;
        }
        this.doc = applyComponents(this.doc, remote);
        this.events.onDocChange?.(this.doc);
        return;
      }
      case "eval":
        this.events.onEval?.(msg);
        return;
      case "error":
        this.events.onError?.(msg);
        return;
    }
  }
}

/** Wire a SessionCore to a live WebSocket-shaped transport. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
}

export function attach(
  socket: SocketLike,
  name: string,
  events: SessionEvents = {},
): { core: SessionCore; onMessage: (raw: string) => void } {
  const core = new SessionCore((msg) => socket.send(JSON.stringify(msg)), name, events);
  return {
    core,
    onMessage: (raw: string) => core.receive(JSON.parse(raw) as ServerMessage),
  };
}
