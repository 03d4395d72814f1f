// Flight controls: held keys and clicked buttons map onto the primitive
// alphabet; at most one control command goes out per tick, and only when
// the commanded triple changes (the server latches the last command).

export interface ControlState {
  turn: "straight" | "left" | "right";
  vertical: "level" | "climb" | "descend";
  speed_cmd: "hold" | "slow" | "fast";
}

export const NEUTRAL_CONTROLS: ControlState = {
  turn: "straight",
  vertical: "level",
  speed_cmd: "hold",
};

const KEY_MAP: Record<string, Partial<ControlState>> = {
  ArrowLeft: { turn: "left" },
  ArrowRight: { turn: "right" },
  ArrowUp: { vertical: "climb" },
  ArrowDown: { vertical: "descend" },
  a: { turn: "left" },
  d: { turn: "right" },
  w: { vertical: "climb" },
  s: { vertical: "descend" },
  "-": { speed_cmd: "slow" },
  "+": { speed_cmd: "fast" },
  "=": { speed_cmd: "fast" },
};

export function controlsFromKeys(held: ReadonlySet<string>): ControlState {
  const state: ControlState = { ...NEUTRAL_CONTROLS };
  for (const key of held) {
    Object.assign(state, KEY_MAP[key] ?? {});
  }
  return state;
}

export function sameControls(a: ControlState, b: ControlState): boolean {
  return a.turn === b.turn && a.vertical === b.vertical && a.speed_cmd === b.speed_cmd;
}

/** Coalesces control sends: emits only on change or on a new tick. */
export class ControlCoalescer {
  private lastSent: ControlState | null = null;
  private lastTick = -1;

  due(state: ControlState, tick: number): boolean {
    if (this.lastSent !== null && sameControls(state, this.lastSent) &&
        tick === this.lastTick) {
      return false;
    }
    if (this.lastSent !== null && sameControls(state, this.lastSent)) {
      // unchanged: the server latch keeps flying it, nothing to say
      return false;
    }
    this.lastSent = { ...state };
    this.lastTick = tick;
    return true;
  }

  reset(): void {
    this.lastSent = null;
    this.lastTick = -1;
  }
}
