// Canonical CTAF phraseology, mirroring the server grammar so every call the
// composer emits parses on the other end.

const DIGIT_WORDS = [
  "zero", "one", "two", "three", "four",
  "five", "six", "seven", "eight", "niner",
];

const PHONETIC: Record<string, string> = {
  A: "alpha", B: "bravo", C: "charlie", D: "delta", E: "echo", F: "foxtrot",
  G: "golf", H: "hotel", I: "india", J: "juliett", K: "kilo", L: "lima",
  M: "mike", N: "november", O: "oscar", P: "papa", Q: "quebec", R: "romeo",
  S: "sierra", T: "tango", U: "uniform", V: "victor", W: "whiskey",
  X: "xray", Y: "yankee", Z: "zulu",
};

const MAKE_WORDS = [
  "cessna", "piper", "cirrus", "skyhawk", "skylane", "mooney", "bonanza",
  "robot", "experimental", "helicopter",
];

export const LEGS = ["upwind", "crosswind", "downwind", "base", "final"] as const;
export const CARDINALS = [
  "north", "northeast", "east", "southeast",
  "south", "southwest", "west", "northwest",
] as const;

export const INTENT_PHRASES: Record<string, string> = {
  landing: "landing",
  low_approach: "low approach",
  takeoff: "departing",
  change_runway: "changing to",
};

export function spellRunway(designator: string): string {
  return designator
    .split("")
    .map((ch) => DIGIT_WORDS[Number(ch)])
    .join(" ");
}

export function spellCallsign(callsign: string): string {
  const upper = callsign.toUpperCase();
  const words: string[] = [];
  let rest = upper;
  for (const make of MAKE_WORDS) {
    if (upper.toLowerCase().startsWith(make)) {
      words.push(make);
      rest = upper.slice(make.length);
      break;
    }
  }
  for (const ch of rest) {
    if (ch >= "0" && ch <= "9") {
      words.push(DIGIT_WORDS[Number(ch)]);
    } else if (PHONETIC[ch]) {
      words.push(PHONETIC[ch]);
    }
  }
  return words.join(" ");
}

export interface CallSpec {
  airfield: string;
  callsign: string;
  leg?: string;
  positionRunway?: string;
  distanceNm?: number;
  cardinal?: string;
  intentKind?: string;
  intentRunway?: string;
}

export function composeCall(spec: CallSpec): string {
  const name = spec.airfield.toLowerCase();
  const parts = [`${name} traffic`, spellCallsign(spec.callsign)];

  if (spec.leg && spec.positionRunway) {
    parts.push(`${spec.leg} runway ${spellRunway(spec.positionRunway)}`);
  } else if (spec.distanceNm && spec.cardinal) {
    const digits = String(spec.distanceNm)
      .split("")
      .map((d) => DIGIT_WORDS[Number(d)])
      .join(" ");
    parts.push(`${digits} miles ${spec.cardinal}, inbound`);
  }

  if (spec.intentKind && spec.intentKind !== "none") {
    if (spec.intentKind === "remain_in_pattern") {
      let phrase = "remaining in the pattern";
      if (spec.intentRunway) phrase += ` runway ${spellRunway(spec.intentRunway)}`;
      parts.push(phrase);
    } else {
      const head = INTENT_PHRASES[spec.intentKind];
      let phrase = head;
      if (spec.intentRunway) phrase += ` runway ${spellRunway(spec.intentRunway)}`;
      parts.push(phrase);
    }
  }

  parts.push(name);
  return parts.join(", ");
}
