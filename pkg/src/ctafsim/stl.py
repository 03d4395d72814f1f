"""Signal Temporal Logic over discrete traces with quantitative semantics.

Robustness follows the standard space semantics: predicates are signed
margins, negation flips sign, and/or are min/max, and the bounded temporal
operators take min/max over their window. A positive value means the boolean
semantics hold (sign soundness is the contract, checked against the
brute-force evaluator below). Windows that run past the end of a trace clip
to the last sample.

Textual form is prefix s-expressions, e.g.

    (and (G 0 60 (>= sep 300)) (G 0 60 (<= alt 360)))
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union


@dataclass(slots=True, frozen=True)
class Pred:
    """Atomic comparison of a named channel against a threshold.

    op ">=" scores signal - threshold, "<=" scores threshold - signal.
    """
    name: str
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in (">=", "<="):
            raise ValueError(f"predicate op must be >= or <=, got {self.op!r}")


@dataclass(slots=True, frozen=True)
class Not:
    child: "Formula"


@dataclass(slots=True, frozen=True)
class And:
    children: tuple["Formula", ...]


@dataclass(slots=True, frozen=True)
class Or:
    children: tuple["Formula", ...]


@dataclass(slots=True, frozen=True)
class Globally:
    a_s: float
    b_s: float
    child: "Formula"

    def __post_init__(self):
        if not (0 <= self.a_s <= self.b_s):
            raise ValueError("interval must satisfy 0 <= a <= b")


@dataclass(slots=True, frozen=True)
class Eventually:
    a_s: float
    b_s: float
    child: "Formula"

    def __post_init__(self):
        if not (0 <= self.a_s <= self.b_s):
            raise ValueError("interval must satisfy 0 <= a <= b")


Formula = Union[Pred, Not, And, Or, Globally, Eventually]


def conj(*children: Formula) -> Formula:
    return And(tuple(children))


def disj(*children: Formula) -> Formula:
    return Or(tuple(children))


@dataclass(slots=True)
class Trace:
    """Sampled predicate channels on a fixed stride. All channels equal length."""

    stride_s: float
    channels: dict[str, list[float]]

    def __post_init__(self):
        if self.stride_s <= 0:
            raise ValueError("stride must be positive")
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) > 1:
            raise ValueError(f"channel lengths differ: {lengths}")
        if lengths and next(iter(lengths)) < 1:
            raise ValueError("channels must hold at least one sample")

    def __len__(self) -> int:
        if not self.channels:
            return 0
        return len(next(iter(self.channels.values())))

    def channel(self, name: str) -> list[float]:
        try:
            return self.channels[name]
        except KeyError:
            raise KeyError(f"unknown predicate channel {name!r}") from None


def _window(trace: Trace, t_index: int, a_s: float, b_s: float) -> range:
    """Sample indices covered by [t+a, t+b], clipped to the trace end."""
    n = len(trace)
    lo = t_index + math.ceil(a_s / trace.stride_s - 1e-9)
    hi = t_index + math.floor(b_s / trace.stride_s + 1e-9)
    hi = min(hi, n - 1)
    if lo > hi or lo >= n:
        raise ValueError(f"empty window [{a_s},{b_s}] at index {t_index} (trace length {n})")
    return range(lo, hi + 1)


def robustness(formula: Formula, trace: Trace, t_index: int = 0) -> float:
    """Quantitative satisfaction margin of the formula at a sample index."""
    if not (0 <= t_index < len(trace)):
        raise ValueError(f"t_index {t_index} outside trace of length {len(trace)}")
    if isinstance(formula, Pred):
        value = trace.channel(formula.name)[t_index]
        return value - formula.threshold if formula.op == ">=" else formula.threshold - value
    if isinstance(formula, Not):
        return -robustness(formula.child, trace, t_index)
    if isinstance(formula, And):
        return min(robustness(c, trace, t_index) for c in formula.children)
    if isinstance(formula, Or):
        return max(robustness(c, trace, t_index) for c in formula.children)
    if isinstance(formula, Globally):
        window = _window(trace, t_index, formula.a_s, formula.b_s)
        return min(robustness(formula.child, trace, k) for k in window)
    if isinstance(formula, Eventually):
        window = _window(trace, t_index, formula.a_s, formula.b_s)
        return max(robustness(formula.child, trace, k) for k in window)
    raise TypeError(f"not an STL formula: {formula!r}")


def brute_force_satisfaction(formula: Formula, trace: Trace, t_index: int = 0) -> bool:
    """Boolean semantics by direct recursion with for-all/exists over windows.

    Kept deliberately independent of `robustness` as its sign oracle.
    """
    if isinstance(formula, Pred):
        value = trace.channel(formula.name)[t_index]
        return value >= formula.threshold if formula.op == ">=" else value <= formula.threshold
    if isinstance(formula, Not):
        return not brute_force_satisfaction(formula.child, trace, t_index)
    if isinstance(formula, And):
        return all(brute_force_satisfaction(c, trace, t_index) for c in formula.children)
    if isinstance(formula, Or):
        return any(brute_force_satisfaction(c, trace, t_index) for c in formula.children)
    if isinstance(formula, Globally):
        window = _window(trace, t_index, formula.a_s, formula.b_s)
        return all(brute_force_satisfaction(formula.child, trace, k) for k in window)
    if isinstance(formula, Eventually):
        window = _window(trace, t_index, formula.a_s, formula.b_s)
        return any(brute_force_satisfaction(formula.child, trace, k) for k in window)
    raise TypeError(f"not an STL formula: {formula!r}")


# ---------------------------------------------------------------------------
# textual form


def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)


def to_text(formula: Formula) -> str:
    if isinstance(formula, Pred):
        return f"({formula.op} {formula.name} {_fmt_num(formula.threshold)})"
    if isinstance(formula, Not):
        return f"(not {to_text(formula.child)})"
    if isinstance(formula, And):
        return "(and " + " ".join(to_text(c) for c in formula.children) + ")"
    if isinstance(formula, Or):
        return "(or " + " ".join(to_text(c) for c in formula.children) + ")"
    if isinstance(formula, Globally):
        return f"(G {_fmt_num(formula.a_s)} {_fmt_num(formula.b_s)} {to_text(formula.child)})"
    if isinstance(formula, Eventually):
        return f"(F {_fmt_num(formula.a_s)} {_fmt_num(formula.b_s)} {to_text(formula.child)})"
    raise TypeError(f"not an STL formula: {formula!r}")


_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def from_text(text: str) -> Formula:
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        raise ValueError("empty formula text")
    formula, rest = _parse_expr(tokens)
    if rest:
        raise ValueError(f"trailing tokens after formula: {rest}")
    return formula


def _parse_expr(tokens: list[str]) -> tuple[Formula, list[str]]:
    if tokens[0] != "(":
        raise ValueError(f"expected '(' at {tokens[:3]}")
    head, rest = tokens[1], tokens[2:]
    if head in (">=", "<="):
        name, num = rest[0], rest[1]
        if rest[2] != ")":
            raise ValueError("malformed predicate")
        return Pred(name, head, float(num)), rest[3:]
    if head == "not":
        child, rest = _parse_expr(rest)
        _expect_close(rest)
        return Not(child), rest[1:]
    if head in ("and", "or"):
        children = []
        while rest and rest[0] != ")":
            child, rest = _parse_expr(rest)
            children.append(child)
        _expect_close(rest)
        node = And(tuple(children)) if head == "and" else Or(tuple(children))
        return node, rest[1:]
    if head in ("G", "F"):
        a, b = float(rest[0]), float(rest[1])
        child, rest = _parse_expr(rest[2:])
        _expect_close(rest)
        node = Globally(a, b, child) if head == "G" else Eventually(a, b, child)
        return node, rest[1:]
    raise ValueError(f"unknown operator {head!r}")


def _expect_close(tokens: list[str]) -> None:
    if not tokens or tokens[0] != ")":
        raise ValueError("missing ')'")
