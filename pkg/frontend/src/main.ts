// Cockpit wiring: socket -> view model -> canvas + panels; inputs -> commands.

import { ControlCoalescer, controlsFromKeys } from "./controls.js";
import { CARDINALS, LEGS, composeCall } from "./phraseology.js";
import type { AirfieldMap, ServerMessage } from "./protocol.js";
import { drawScene, fitViewport } from "./render.js";
import { CockpitSocket } from "./socket.js";
import {
  applyMessage,
  clearReject,
  connectionChanged,
  initialViewModel,
} from "./state.js";

let model = initialViewModel();
let map: AirfieldMap | null = null;

const canvas = document.getElementById("traffic") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const transcriptEl = document.getElementById("transcript")!;
const badgeEl = document.getElementById("badge")!;
const debugEl = document.getElementById("ai-debug")!;

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const socket = new CockpitSocket(
  wsUrl,
  (url) => new WebSocket(url) as unknown as import("./socket.js").SocketLike,
  (message: ServerMessage) => {
    model = applyMessage(model, message);
    if (message.type === "reject") {
      badgeEl.textContent = `not understood: ${message.reason}`;
      badgeEl.classList.add("visible");
      setTimeout(() => {
        badgeEl.classList.remove("visible");
        model = clearReject(model);
      }, 4000);
    }
    render();
  },
  (state) => {
    model = connectionChanged(model, state);
    statusEl.textContent = state;
    render();
  },
);

async function boot(): Promise<void> {
  const resp = await fetch("/api/map");
  map = (await resp.json()) as AirfieldMap;
  buildComposer();
  socket.connect();
  render();
}

function render(): void {
  if (!map) return;
  const vp = fitViewport(map, canvas.width, canvas.height);
  drawScene(ctx, vp, map, model.snapshot, model.selectedAgent);

  transcriptEl.innerHTML = model.transcript
    .slice(-14)
    .map((e) => `<div><span class="t">t=${e.time_s.toFixed(0)}</span> ` +
                `<span class="who">${e.agent_id}</span> ${escapeHtml(e.text)}</div>`)
    .join("");
  transcriptEl.scrollTop = transcriptEl.scrollHeight;

  const dbg = model.snapshot?.ai_debug;
  if (dbg) {
    debugEl.textContent =
      `AI goal: rwy ${dbg.goal_runway ?? "?"} | ` +
      `rule margin: ${dbg.last_robustness ?? "?"}` +
      (dbg.safety_modified ? " | SAFETY MODIFIED" : "");
  }
  const sim = model.snapshot ? `t=${model.snapshot.time_s.toFixed(0)}s` : "";
  statusEl.textContent = `${model.connection} ${sim} flying: ${model.selectedAgent ?? "observer"}`;
}

function escapeHtml(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

// -- flight controls ---------------------------------------------------------

const held = new Set<string>();
const coalescer = new ControlCoalescer();

window.addEventListener("keydown", (e) => {
  if ((e.target as HTMLElement).tagName === "INPUT") return;
  held.add(e.key);
});
window.addEventListener("keyup", (e) => held.delete(e.key));

setInterval(() => {
  if (!model.selectedAgent) return;
  const state = controlsFromKeys(held);
  const tick = model.snapshot ? Math.round(model.snapshot.time_s) : 0;
  if (coalescer.due(state, tick)) {
    socket.send({ kind: "control", agent_id: model.selectedAgent, ...state });
  }
}, 250);

for (const button of document.querySelectorAll<HTMLButtonElement>("[data-hold]")) {
  const key = button.dataset.hold!;
  button.addEventListener("mousedown", () => held.add(key));
  button.addEventListener("mouseup", () => held.delete(key));
  button.addEventListener("mouseleave", () => held.delete(key));
}

document.getElementById("pause")!.addEventListener("click", () => {
  const paused = model.snapshot?.paused ?? false;
  socket.send({ kind: paused ? "resume" : "pause" });
});

// -- radio console ------------------------------------------------------------

function option(value: string, label?: string): string {
  return `<option value="${value}">${label ?? value}</option>`;
}

function buildComposer(): void {
  const legSel = document.getElementById("leg") as HTMLSelectElement;
  legSel.innerHTML = option("", "(position)") +
    LEGS.map((l) => option(l)).join("") +
    CARDINALS.map((c) => option(`bearing:${c}`, `miles ${c}`)).join("");
  const rwySel = document.getElementById("comp-runway") as HTMLSelectElement;
  rwySel.innerHTML = (map?.runways ?? [])
    .map((r) => option(r.designator)).join("");
  const intentSel = document.getElementById("intent") as HTMLSelectElement;
  intentSel.innerHTML = [
    option("none", "(no intent)"), option("landing"),
    option("low_approach", "low approach"), option("takeoff", "departing"),
    option("change_runway", "changing to"),
    option("remain_in_pattern", "remaining in pattern"),
  ].join("");
}

document.getElementById("compose-send")!.addEventListener("click", () => {
  if (!model.selectedAgent || !map) return;
  const legRaw = (document.getElementById("leg") as HTMLSelectElement).value;
  const runway = (document.getElementById("comp-runway") as HTMLSelectElement).value;
  const intent = (document.getElementById("intent") as HTMLSelectElement).value;
  const spec: Parameters<typeof composeCall>[0] = {
    airfield: map.airfield,
    callsign: model.selectedAgent,
    intentKind: intent,
    intentRunway: intent === "none" || intent === "remain_in_pattern" ? undefined : runway,
  };
  if (legRaw.startsWith("bearing:")) {
    spec.distanceNm = 2;
    spec.cardinal = legRaw.slice("bearing:".length);
  } else if (legRaw) {
    spec.leg = legRaw;
    spec.positionRunway = runway;
  }
  socket.send({ kind: "radio", agent_id: model.selectedAgent, text: composeCall(spec) });
});

document.getElementById("free-send")!.addEventListener("click", () => {
  if (!model.selectedAgent) return;
  const input = document.getElementById("free-text") as HTMLInputElement;
  if (!input.value.trim()) return;
  socket.send({ kind: "radio", agent_id: model.selectedAgent, text: input.value });
  input.value = "";
});

boot();
