import { describe, expect, it } from "vitest";
import type { ServerMessage } from "./protocol";
import { CockpitSocket, type SocketLike } from "./socket";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  readyState = 0;

  open(): void {
    this.readyState = 1;
    this.onopen?.();
  }

  drop(): void {
    this.readyState = 3;
    this.onclose?.();
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.readyState = 3;
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const messages: ServerMessage[] = [];
  const states: string[] = [];
  const timers: { fn: () => void; delay: number }[] = [];
  const client = new CockpitSocket(
    "ws://test/ws",
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    (m) => messages.push(m),
    (s) => states.push(s),
    (fn, delay) => timers.push({ fn, delay }),
  );
  return { client, sockets, messages, states, timers };
}

describe("CockpitSocket", () => {
  it("sequences commands monotonically per connection", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].open();
    expect(h.client.send({ kind: "pause" })).toBe(1);
    expect(h.client.send({ kind: "resume" })).toBe(2);
    const first = JSON.parse(h.sockets[0].sent[0]);
    expect(first.client_seq).toBe(1);
    expect(first.type).toBe("command");
  });

  it("drops sends while disconnected", () => {
    const h = harness();
    h.client.connect();
    expect(h.client.send({ kind: "pause" })).toBeNull();
  });

  it("reconnects with exponential backoff", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].open();
    h.sockets[0].drop();
    expect(h.states).toContain("reconnecting");
    expect(h.timers[0].delay).toBe(1000);
    h.timers[0].fn(); // first retry
    h.sockets[1].drop();
    expect(h.timers[1].delay).toBe(2000);
    h.timers[1].fn();
    h.sockets[2].open();
    expect(h.states[h.states.length - 1]).toBe("connected");
  });

  it("resets the sequence on a fresh connection", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].open();
    h.client.send({ kind: "pause" });
    h.sockets[0].drop();
    h.timers[0].fn();
    h.sockets[1].open();
    expect(h.client.send({ kind: "pause" })).toBe(1);
  });

  it("parses inbound messages", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].open();
    h.sockets[0].onmessage?.({
      data: JSON.stringify({ type: "hello", agents: ["pilot"] }),
    });
    expect(h.messages[0]).toEqual({ type: "hello", agents: ["pilot"] });
  });

  it("stays closed after an explicit close", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].open();
    h.client.close();
    h.sockets[0].onclose?.();
    expect(h.timers.length).toBe(0);
  });
});
