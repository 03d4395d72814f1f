// Wire types for the ctafsim snapshot/command protocol (snake_case JSON).

export interface AgentSnapshot {
  id: string;
  kind: "ai" | "scripted" | "human";
  x: number;
  y: number;
  z: number;
  heading_deg: number;
  speed_mps: number;
  status: "active" | "finished";
  current_leg: string | null;
}

export interface RadioEntry {
  time_s: number;
  agent_id: string;
  text: string;
}

export interface AiDebug {
  goal_runway: string | null;
  most_likely_branch: number[][];
  last_robustness: number | null;
  safety_modified: boolean;
}

export interface Snapshot {
  type: "snapshot";
  time_s: number;
  paused: boolean;
  finished: boolean;
  agents: AgentSnapshot[];
  radio_tail: RadioEntry[];
  ai_debug: AiDebug;
}

export interface HelloMessage {
  type: "hello";
  agents: string[];
}

export interface RejectMessage {
  type: "reject";
  seq: number;
  reason: string;
}

export type ServerMessage = Snapshot | HelloMessage | RejectMessage;

export interface ClientCommand {
  type: "command";
  kind: "control" | "radio" | "intent" | "pause" | "resume" | "timescale";
  agent_id?: string;
  client_seq: number;
  turn?: "straight" | "left" | "right";
  vertical?: "level" | "climb" | "descend";
  speed_cmd?: "hold" | "slow" | "fast";
  text?: string;
  intent_kind?: string;
  runway?: string;
  factor?: number;
}

export interface RunwayMap {
  designator: string;
  threshold: [number, number];
  heading_deg: number;
  length_m: number;
  pattern: number[][];
}

export interface AirfieldMap {
  airfield: string;
  pattern_altitude_m: number;
  d_safe_m: number;
  runways: RunwayMap[];
}
