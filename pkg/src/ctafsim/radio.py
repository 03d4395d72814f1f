"""CTAF self-announce phraseology: parse and generate broadcast calls.

The channel carries text in a fixed comma-separated clause grammar with the
airfield-name sandwich used at non-towered fields:

    call   := name " traffic, " clause {", " clause} ", " name
    clause := callsign | position | intent
    position := leg " runway " rwy
              | dist " miles " cardinal [", inbound"]
    leg    := "upwind" | "crosswind" | ["left "|"right "] "downwind"
              | "base" | "final"
    intent := ("landing" | "low approach" | "departing" | "changing to")
              " runway " rwy
            | "remaining in the pattern" [" runway " rwy]
    rwy    := digit-word digit-word

Digits are spoken zero..eight plus "niner"; parsing also tolerates "nine" and
bare numerals. Calls that do not open with "<name> traffic" are unparseable
and ignored by listeners; calls whose tail fails the grammar come back with
a low-confidence flag and no intent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .geo import PatternLeg


class IntentKind(Enum):
    LANDING = "landing"
    LOW_APPROACH = "low_approach"
    TAKEOFF = "takeoff"
    REMAIN_IN_PATTERN = "remain_in_pattern"
    CHANGE_RUNWAY = "change_runway"
    NONE = "none"


#: intent kinds that must name a runway
_RUNWAY_REQUIRED = {IntentKind.LANDING, IntentKind.LOW_APPROACH, IntentKind.CHANGE_RUNWAY}


@dataclass(slots=True, frozen=True)
class PilotIntent:
    kind: IntentKind = IntentKind.NONE
    runway: Optional[str] = None

    def validate(self) -> None:
        if self.kind in _RUNWAY_REQUIRED and self.runway is None:
            raise ValueError(f"intent {self.kind.value} requires a runway")
        if self.kind is IntentKind.NONE and self.runway is not None:
            raise ValueError("intent NONE cannot carry a runway")


NO_INTENT = PilotIntent()


@dataclass(slots=True, frozen=True)
class LegReport:
    leg: PatternLeg
    runway: str


@dataclass(slots=True, frozen=True)
class BearingReport:
    distance_nm: int
    cardinal: str


Position = Union[LegReport, BearingReport]


@dataclass(slots=True)
class RadioCall:
    airfield_name: str
    callsign: str = ""
    position: Optional[Position] = None
    intent: PilotIntent = NO_INTENT
    raw_text: str = ""
    low_confidence: bool = False

    def same_content(self, other: "RadioCall") -> bool:
        """Semantic equality, ignoring raw text and confidence."""
        return (
            self.airfield_name.upper() == other.airfield_name.upper()
            and self.callsign == other.callsign
            and self.position == other.position
            and self.intent == other.intent
        )


class UnparseableCall(ValueError):
    """Raised when text does not open with '<airfield> traffic'."""

    def __init__(self, raw_text: str):
        super().__init__(f"not a CTAF call: {raw_text!r}")
        self.raw_text = raw_text


# ---------------------------------------------------------------------------
# token tables

DIGIT_WORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven",
               "eight", "niner"]
_DIGIT_FROM_WORD = {w: str(i) for i, w in enumerate(DIGIT_WORDS)}
_DIGIT_FROM_WORD["nine"] = "9"  # tolerated on parse; generation says "niner"

_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "niner": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
    "twenty": 20,
}

CARDINALS = ["north", "northeast", "east", "southeast",
             "south", "southwest", "west", "northwest"]

_PHONETIC = {
    "alpha": "A", "bravo": "B", "charlie": "C", "delta": "D", "echo": "E",
    "foxtrot": "F", "golf": "G", "hotel": "H", "india": "I", "juliett": "J",
    "kilo": "K", "lima": "L", "mike": "M", "november": "N", "oscar": "O",
    "papa": "P", "quebec": "Q", "romeo": "R", "sierra": "S", "tango": "T",
    "uniform": "U", "victor": "V", "whiskey": "W", "xray": "X", "yankee": "Y",
    "zulu": "Z",
}
_PHONETIC_FROM_LETTER = {v: k for k, v in _PHONETIC.items()}

#: aircraft-type words spoken verbatim at the head of a callsign
_MAKE_WORDS = {"cessna", "piper", "cirrus", "skyhawk", "skylane", "mooney",
               "bonanza", "robot", "experimental", "helicopter"}

_LEG_WORDS = {
    "upwind": PatternLeg.UPWIND,
    "crosswind": PatternLeg.CROSSWIND,
    "downwind": PatternLeg.DOWNWIND,
    "base": PatternLeg.BASE,
    "final": PatternLeg.FINAL,
}

_INTENT_WORDS = [
    # (token tuple, kind, runway required in clause)
    (("landing",), IntentKind.LANDING, True),
    (("low", "approach"), IntentKind.LOW_APPROACH, True),
    (("departing",), IntentKind.TAKEOFF, False),
    (("changing", "to"), IntentKind.CHANGE_RUNWAY, True),
]

# wide enough for make-word callsigns like CESSNA321
_CALLSIGN_RE = re.compile(r"^[A-Z0-9]{2,12}$")


def spell_runway(designator: str) -> str:
    return " ".join(DIGIT_WORDS[int(ch)] for ch in designator)


def _parse_runway(tokens: list[str]) -> Optional[str]:
    """Two digit words (or a bare 2-digit numeral) after a 'runway' keyword."""
    if len(tokens) == 1 and re.fullmatch(r"\d{2}", tokens[0]):
        return tokens[0]
    if len(tokens) == 2 and all(t in _DIGIT_FROM_WORD for t in tokens):
        return _DIGIT_FROM_WORD[tokens[0]] + _DIGIT_FROM_WORD[tokens[1]]
    return None


def _runway_tail(tokens: list[str]) -> Optional[str]:
    """Match trailing ['runway', <rwy>] tokens; None if absent or malformed."""
    if "runway" not in tokens:
        return None
    i = tokens.index("runway")
    return _parse_runway(tokens[i + 1:])


def _try_position(tokens: list[str]) -> Optional[Position]:
    # leg report: [left|right] <leg> runway <rwy>
    toks = tokens
    if toks and toks[0] in ("left", "right") and len(toks) > 1 and toks[1] == "downwind":
        toks = toks[1:]
    if toks and toks[0] in _LEG_WORDS:
        if len(toks) >= 2 and toks[1] == "runway":
            rwy = _parse_runway(toks[2:])
            if rwy is not None:
                return LegReport(_LEG_WORDS[toks[0]], rwy)
        return None
    # bearing report: <dist> miles <cardinal>
    if "miles" in tokens:
        i = tokens.index("miles")
        dist = _parse_distance(tokens[:i])
        rest = tokens[i + 1:]
        if dist is not None and len(rest) == 1 and rest[0] in CARDINALS:
            return BearingReport(dist, rest[0])
    return None


def _parse_distance(tokens: list[str]) -> Optional[int]:
    if not tokens:
        return None
    if len(tokens) == 1:
        if tokens[0].isdigit():
            return int(tokens[0])
        if tokens[0] in _NUMBER_WORDS:
            return _NUMBER_WORDS[tokens[0]]
    if all(t in _DIGIT_FROM_WORD for t in tokens):
        return int("".join(_DIGIT_FROM_WORD[t] for t in tokens))
    return None


def _try_intent(tokens: list[str]) -> Optional[PilotIntent]:
    if tokens[:4] == ["remaining", "in", "the", "pattern"]:
        rest = tokens[4:]
        if not rest:
            return PilotIntent(IntentKind.REMAIN_IN_PATTERN)
        if rest[0] == "runway":
            rwy = _parse_runway(rest[1:])
            if rwy is not None:
                return PilotIntent(IntentKind.REMAIN_IN_PATTERN, rwy)
        return None
    for words, kind, needs_runway in _INTENT_WORDS:
        n = len(words)
        if tuple(tokens[:n]) != words:
            continue
        rest = tokens[n:]
        if not rest:
            return None if needs_runway else PilotIntent(kind)
        if rest[0] == "runway":
            rwy = _parse_runway(rest[1:])
            if rwy is not None:
                return PilotIntent(kind, rwy)
        return None
    return None


def _try_callsign(tokens: list[str]) -> Optional[str]:
    out: list[str] = []
    for i, tok in enumerate(tokens):
        if tok in _DIGIT_FROM_WORD:
            out.append(_DIGIT_FROM_WORD[tok])
        elif tok in _PHONETIC:
            out.append(_PHONETIC[tok])
        elif i == 0 and tok in _MAKE_WORDS:
            out.append(tok.upper())
        elif tok.isalnum() and i == 0:
            out.append(tok.upper())
        else:
            return None
    sign = "".join(out)
    return sign if _CALLSIGN_RE.fullmatch(sign) else None


def _clean(text: str) -> str:
    text = text.lower()
    text = re.sub(r"[^a-z0-9,\s]", " ", text)
    return re.sub(r"\s+", " ", text).strip()


def parse_call(text: str) -> RadioCall:
    """Parse broadcast text. Total over arbitrary input: raises UnparseableCall
    only for text without the '<name> traffic' opener; anything else yields a
    call, possibly low-confidence."""
    raw = text
    cleaned = _clean(text if isinstance(text, str) else str(text))
    clauses = [c.strip() for c in cleaned.split(",")]
    head = clauses[0].split()
    if len(head) < 2 or head[-1] != "traffic":
        raise UnparseableCall(raw)
    name = " ".join(head[:-1]).upper()

    call = RadioCall(airfield_name=name, raw_text=raw)
    body = clauses[1:]
    if body and body[-1].strip() == name.lower():
        body = body[:-1]
    else:
        call.low_confidence = True

    intent: PilotIntent = NO_INTENT
    for clause in body:
        tokens = clause.split()
        if not tokens:
            call.low_confidence = True
            break
        if tokens == ["inbound"] and isinstance(call.position, BearingReport):
            continue
        if call.position is None:
            pos = _try_position(tokens)
            if pos is not None:
                call.position = pos
                continue
        if intent is NO_INTENT:
            parsed = _try_intent(tokens)
            if parsed is not None:
                intent = parsed
                continue
        if not call.callsign:
            sign = _try_callsign(tokens)
            if sign is not None:
                call.callsign = sign
                continue
        call.low_confidence = True
        break

    # a garbled call contributes position/callsign at best, never intent
    call.intent = NO_INTENT if call.low_confidence else intent
    return call


def _spell_callsign(callsign: str) -> str:
    rest = callsign
    words: list[str] = []
    for make in _MAKE_WORDS:
        if callsign.lower().startswith(make):
            words.append(make)
            rest = callsign[len(make):]
            break
    for ch in rest:
        if ch.isdigit():
            words.append(DIGIT_WORDS[int(ch)])
        else:
            words.append(_PHONETIC_FROM_LETTER[ch.upper()])
    return " ".join(words)


def _spell_position(position: Position) -> str:
    if isinstance(position, LegReport):
        return f"{position.leg.value} runway {spell_runway(position.runway)}"
    digits = " ".join(DIGIT_WORDS[int(ch)] for ch in str(position.distance_nm))
    return f"{digits} miles {position.cardinal}, inbound"


_INTENT_PHRASE = {
    IntentKind.LANDING: "landing",
    IntentKind.LOW_APPROACH: "low approach",
    IntentKind.TAKEOFF: "departing",
    IntentKind.CHANGE_RUNWAY: "changing to",
}


def _spell_intent(intent: PilotIntent) -> str:
    if intent.kind is IntentKind.REMAIN_IN_PATTERN:
        phrase = "remaining in the pattern"
        if intent.runway is not None:
            phrase += f" runway {spell_runway(intent.runway)}"
        return phrase
    phrase = _INTENT_PHRASE[intent.kind]
    if intent.runway is not None:
        phrase += f" runway {spell_runway(intent.runway)}"
    return phrase


def generate_call(call: RadioCall) -> str:
    """Emit canonical phraseology for a call. Round-trips through parse_call."""
    call.intent.validate()
    if not _CALLSIGN_RE.fullmatch(call.callsign or ""):
        raise ValueError(f"bad callsign {call.callsign!r}")
    name = call.airfield_name.lower()
    parts = [f"{name} traffic", _spell_callsign(call.callsign)]
    if call.position is not None:
        parts.append(_spell_position(call.position))
    if call.intent.kind is not IntentKind.NONE:
        parts.append(_spell_intent(call.intent))
    parts.append(name)
    return ", ".join(parts)


def intent_of_call(call: RadioCall) -> PilotIntent:
    """Operational intent conveyed by a call: the declared one, or
    remain-in-pattern inferred from a bare leg report."""
    if call.low_confidence:
        return NO_INTENT
    if call.intent.kind is not IntentKind.NONE:
        return call.intent
    if isinstance(call.position, LegReport):
        return PilotIntent(IntentKind.REMAIN_IN_PATTERN, call.position.runway)
    return NO_INTENT
