import { describe, expect, it } from "vitest";
import type { Snapshot } from "./protocol";
import { applyMessage, connectionChanged, initialViewModel } from "./state";

function snapshot(timeS: number, radio: [number, string, string][] = []): Snapshot {
  return {
    type: "snapshot",
    time_s: timeS,
    paused: false,
    finished: false,
    agents: [
      {
        id: "robot1", kind: "ai", x: 0, y: 0, z: 300,
        heading_deg: 80, speed_mps: 40, status: "active", current_leg: null,
      },
    ],
    radio_tail: radio.map(([t, who, text]) => ({
      time_s: t, agent_id: who, text,
    })),
    ai_debug: {
      goal_runway: "26", most_likely_branch: [],
      last_robustness: 1.0, safety_modified: false,
    },
  };
}

describe("view model", () => {
  it("hello selects a claimable agent", () => {
    let model = initialViewModel();
    model = applyMessage(model, { type: "hello", agents: ["pilot"] });
    expect(model.claimable).toEqual(["pilot"]);
    expect(model.selectedAgent).toBe("pilot");
  });

  it("renders only from the latest snapshot", () => {
    let model = initialViewModel();
    model = applyMessage(model, snapshot(5));
    model = applyMessage(model, snapshot(6));
    expect(model.snapshot?.time_s).toBe(6);
  });

  it("transcript is append-only across overlapping tails", () => {
    let model = initialViewModel();
    model = applyMessage(model, snapshot(5, [[3, "robot1", "call a"]]));
    model = applyMessage(
      model,
      snapshot(6, [[3, "robot1", "call a"], [5, "pilot", "call b"]]),
    );
    model = applyMessage(
      model,
      snapshot(7, [[5, "pilot", "call b"]]),
    );
    expect(model.transcript.map((e) => e.text)).toEqual(["call a", "call b"]);
  });

  it("reject surfaces and clears", () => {
    let model = initialViewModel();
    model = applyMessage(model, { type: "reject", seq: 3, reason: "unparseable" });
    expect(model.lastReject?.reason).toBe("unparseable");
  });

  it("connection state transitions", () => {
    let model = initialViewModel();
    expect(model.connection).toBe("connecting");
    model = connectionChanged(model, "connected");
    expect(model.connection).toBe("connected");
    model = connectionChanged(model, "reconnecting");
    expect(model.connection).toBe("reconnecting");
  });

  it("reload semantics: a fresh model rebuilt from the next snapshot matches", () => {
    // the cockpit carries no physics: two clients that saw different
    // histories agree on the world after one shared snapshot
    const shared = snapshot(42, [[40, "robot1", "call x"]]);
    let longLived = initialViewModel();
    longLived = applyMessage(longLived, snapshot(5));
    longLived = applyMessage(longLived, shared);
    let reloaded = initialViewModel();
    reloaded = applyMessage(reloaded, shared);
    expect(longLived.snapshot).toEqual(reloaded.snapshot);
  });
});
