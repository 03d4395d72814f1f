import random

import pytest

from ctafsim.stl import (
    And,
    Eventually,
    Globally,
    Not,
    Or,
    Pred,
    Trace,
    brute_force_satisfaction,
    conj,
    disj,
    from_text,
    robustness,
    to_text,
)


def trace_of(**channels):
    return Trace(stride_s=1.0, channels={k: list(v) for k, v in channels.items()})


class TestSemantics:
    def test_globally_is_min(self):
        tr = trace_of(sep=[500.0, 400.0, 350.0])
        formula = Globally(0, 2, Pred("sep", ">=", 300.0))
        assert robustness(formula, tr, 0) == 50.0

    def test_eventually_is_max(self):
        tr = trace_of(alt=[100.0, 50.0, 5.0])
        formula = Eventually(0, 2, Pred("alt", "<=", 10.0))
        assert robustness(formula, tr, 0) == 5.0

    def test_and_composition(self):
        tr = trace_of(sep=[500.0, 400.0, 350.0], alt=[100.0, 50.0, 5.0])
        formula = conj(
            Globally(0, 2, Pred("sep", ">=", 300.0)),
            Eventually(0, 2, Pred("alt", "<=", 10.0)),
        )
        assert robustness(formula, tr, 0) == 5.0

    def test_not_negates(self):
        tr = trace_of(x=[7.0])
        assert robustness(Not(Pred("x", ">=", 3.0)), tr, 0) == -4.0

    def test_or_is_max(self):
        tr = trace_of(x=[1.0], y=[9.0])
        formula = disj(Pred("x", ">=", 5.0), Pred("y", ">=", 5.0))
        assert robustness(formula, tr, 0) == 4.0

    def test_window_clips_at_trace_end(self):
        tr = trace_of(x=[1.0, 2.0, 3.0])
        assert robustness(Globally(0, 100, Pred("x", ">=", 0.0)), tr, 1) == 2.0

    def test_empty_window_is_error(self):
        tr = trace_of(x=[1.0, 2.0])
        with pytest.raises(ValueError):
            robustness(Globally(5, 9, Pred("x", ">=", 0.0)), tr, 0)

    def test_unknown_channel_is_error(self):
        tr = trace_of(x=[1.0])
        with pytest.raises(KeyError):
            robustness(Pred("nope", ">=", 0.0), tr, 0)

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            Globally(5, 2, Pred("x", ">=", 0.0))


def random_formula(rng: random.Random, names, depth=0):
    if depth >= 3 or rng.random() < 0.35:
        return Pred(rng.choice(names), rng.choice([">=", "<="]), rng.uniform(-5, 5))
    kind = rng.randrange(5)
    if kind == 0:
        return Not(random_formula(rng, names, depth + 1))
    if kind == 1:
        return And(tuple(random_formula(rng, names, depth + 1) for _ in range(2)))
    if kind == 2:
        return Or(tuple(random_formula(rng, names, depth + 1) for _ in range(2)))
    a = rng.randrange(0, 4)
    b = a + rng.randrange(0, 4)
    child = random_formula(rng, names, depth + 1)
    return Globally(a, b, child) if kind == 3 else Eventually(a, b, child)


def random_trace(rng: random.Random, names):
    n = rng.randrange(4, 20)
    return Trace(
        stride_s=1.0,
        channels={name: [rng.uniform(-10, 10) for _ in range(n)] for name in names},
    )


class TestSignSoundness:
    def test_sign_matches_brute_force(self):
        rng = random.Random(1234)
        names = ["a", "b", "c"]
        checked = 0
        for _ in range(2000):
            formula = random_formula(rng, names)
            tr = random_trace(rng, names)
            try:
                rho = robustness(formula, tr, 0)
            except ValueError:
                continue  # window fell entirely off the trace
            if rho == 0.0:
                continue
            sat = brute_force_satisfaction(formula, tr, 0)
            assert (rho > 0) == sat
            checked += 1
        assert checked > 1500

    def test_monotone_in_channel_for_negation_free(self):
        rng = random.Random(5)
        tr = random_trace(rng, ["a"])
        formula = conj(
            Globally(0, 3, Pred("a", ">=", 0.0)),
            Eventually(0, 5, Pred("a", ">=", 2.0)),
        )
        base = robustness(formula, tr, 0)
        lifted = Trace(1.0, {"a": [v + 1.0 for v in tr.channels["a"]]})
        assert robustness(formula, lifted, 0) >= base


class TestTextForm:
    def test_example_shape(self):
        formula = conj(
            Globally(0, 60, Pred("sep", ">=", 300.0)),
            Globally(0, 60, Pred("alt", "<=", 360.0)),
        )
        text = to_text(formula)
        assert text == "(and (G 0 60 (>= sep 300)) (G 0 60 (<= alt 360)))"

    def test_round_trip_random(self):
        rng = random.Random(77)
        for _ in range(300):
            formula = random_formula(rng, ["sep", "alt", "x1"])
            assert from_text(to_text(formula)) == formula

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            from_text("(G 0)")
        with pytest.raises(ValueError):
            from_text("(wat 1 2)")
        with pytest.raises(ValueError):
            from_text("")


class TestTrace:
    def test_uneven_channels_rejected(self):
        with pytest.raises(ValueError):
            Trace(1.0, {"a": [1.0], "b": [1.0, 2.0]})

    def test_zero_stride_rejected(self):
        with pytest.raises(ValueError):
            Trace(0.0, {"a": [1.0]})
