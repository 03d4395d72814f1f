// Websocket client with exponential-backoff reconnect and a monotone
// per-connection command sequence. The socket factory is injectable so the
// logic is testable without a browser.

import type { ClientCommand, ServerMessage } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1;

export class CockpitSocket {
  private socket: SocketLike | null = null;
  private seq = 0;
  private attempts = 0;
  private closed = false;

  constructor(
    private url: string,
    private factory: SocketFactory,
    private onMessage: (message: ServerMessage) => void,
    private onState: (state: "connecting" | "connected" | "reconnecting") => void,
    private schedule: (fn: () => void, delayMs: number) => void = (fn, ms) =>
      setTimeout(fn, ms),
  ) {}

  connect(): void {
    this.onState(this.attempts === 0 ? "connecting" : "reconnecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.seq = 0;
      this.onState("connected");
    };
    socket.onmessage = (event) => {
      this.onMessage(JSON.parse(event.data) as ServerMessage);
    };
    socket.onclose = () => {
      if (this.closed) return;
      const delay = this.backoffMs();
      this.attempts += 1;
      this.schedule(() => this.connect(), delay);
      this.onState("reconnecting");
    };
  }

  backoffMs(): number {
    return Math.min(1000 * 2 ** this.attempts, 15_000);
  }

  send(command: Omit<ClientCommand, "type" | "client_seq">): number | null {
    if (!this.socket || this.socket.readyState !== OPEN) return null;
    this.seq += 1;
    const payload: ClientCommand = {
      type: "command",
      client_seq: this.seq,
      ...command,
    };
    this.socket.send(JSON.stringify(payload));
    return this.seq;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
