// Cockpit view-model: everything rendered comes from the latest snapshot
// plus append-only logs. No client-side simulation.

import type { RejectMessage, ServerMessage, Snapshot } from "./protocol.js";

export interface TranscriptEntry {
  time_s: number;
  agent_id: string;
  text: string;
}

export type ConnectionState = "connecting" | "connected" | "reconnecting";

export interface ViewModel {
  connection: ConnectionState;
  snapshot: Snapshot | null;
  claimable: string[];
  selectedAgent: string | null;
  transcript: TranscriptEntry[];
  lastReject: RejectMessage | null;
}

export function initialViewModel(): ViewModel {
  return {
    connection: "connecting",
    snapshot: null,
    claimable: [],
    selectedAgent: null,
    transcript: [],
    lastReject: null,
  };
}

const TRANSCRIPT_LIMIT = 200;

function transcriptKey(entry: TranscriptEntry): string {
  return `${entry.time_s}|${entry.agent_id}|${entry.text}`;
}

export function applyMessage(model: ViewModel, message: ServerMessage): ViewModel {
  if (message.type === "hello") {
    const selected =
      model.selectedAgent && message.agents.includes(model.selectedAgent)
        ? model.selectedAgent
        : message.agents[0] ?? model.selectedAgent;
    return { ...model, claimable: message.agents, selectedAgent: selected };
  }
  if (message.type === "reject") {
    return { ...model, lastReject: message };
  }
  // snapshot: replace the world, merge new radio entries append-only
  const known = new Set(model.transcript.map(transcriptKey));
  const fresh = message.radio_tail.filter((e) => !known.has(transcriptKey(e)));
  const transcript = [...model.transcript, ...fresh].slice(-TRANSCRIPT_LIMIT);
  return { ...model, snapshot: message, transcript };
}

export function connectionChanged(
  model: ViewModel,
  connection: ConnectionState,
): ViewModel {
  return { ...model, connection };
}

export function clearReject(model: ViewModel): ViewModel {
  return { ...model, lastReject: null };
}
