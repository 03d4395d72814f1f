import math
import random

import pytest

from ctafsim.dubins import shortest_path, theta_to_heading


def sampled_length(path, step_m=0.5):
    """Independent length estimate: chord sum over a dense sampling."""
    n = max(8, int(math.ceil(path.length_m / step_m)))
    pts = [path.sample(path.length_m * k / n) for k in range(n + 1)]
    return sum(
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])
    )


class TestWorkedExamples:
    def test_straight_ahead(self):
        path = shortest_path((0, 0, 90), (1000, 0, 90), 200.0)
        assert path.length_m == pytest.approx(1000.0, rel=1e-6)

    def test_u_turn_is_half_circle(self):
        path = shortest_path((0, 0, 90), (0, 400, 270), 200.0)
        assert path.length_m == pytest.approx(math.pi * 200.0, rel=1e-6)

    def test_quarter_right_arc(self):
        path = shortest_path((0, 0, 0), (200, 200, 90), 200.0)
        assert path.length_m == pytest.approx(math.pi * 200.0 / 2.0, rel=1e-6)

    def test_degenerate_zero_length(self):
        path = shortest_path((50, -30, 123), (50, -30, 123), 200.0)
        assert path.length_m == 0.0


class TestRandomized:
    def test_endpoint_and_length_consistency(self):
        rng = random.Random(42)
        for i in range(300):
            r = rng.uniform(50.0, 500.0)
            start = (rng.uniform(-3e3, 3e3), rng.uniform(-3e3, 3e3), rng.uniform(0, 360))
            goal = (rng.uniform(-3e3, 3e3), rng.uniform(-3e3, 3e3), rng.uniform(0, 360))
            path = shortest_path(start, goal, r)

            ex, ey, eth = path.sample(path.length_m)
            assert math.hypot(ex - goal[0], ey - goal[1]) < 1e-5 * (1 + r), i
            hd = abs((theta_to_heading(eth) - goal[2] + 180.0) % 360.0 - 180.0)
            assert hd < 1e-5, i

            assert path.length_m >= math.hypot(goal[0] - start[0], goal[1] - start[1]) - 1e-6
            assert sampled_length(path) == pytest.approx(path.length_m, rel=1e-6)

    def test_close_range_ccc_words(self):
        rng = random.Random(9)
        words = set()
        for i in range(500):
            r = rng.uniform(100.0, 400.0)
            start = (0.0, 0.0, rng.uniform(0, 360))
            goal = (rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(0, 360))
            path = shortest_path(start, goal, r)
            words.add(path.word)
            ex, ey, _ = path.sample(path.length_m)
            assert math.hypot(ex - goal[0], ey - goal[1]) < 1e-5 * (1 + r), i
        assert "RLR" in words or "LRL" in words

    def test_distance_to_on_path_points_is_zero(self):
        rng = random.Random(5)
        for _ in range(50):
            r = rng.uniform(80.0, 400.0)
            start = (rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(0, 360))
            goal = (rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(0, 360))
            path = shortest_path(start, goal, r)
            for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
                x, y, _ = path.sample(path.length_m * frac)
                assert path.distance_to(x, y) < 1e-6


def test_invalid_radius():
    with pytest.raises(ValueError):
        shortest_path((0, 0, 0), (10, 10, 0), 0.0)


def test_non_finite_inputs():
    with pytest.raises(ValueError):
        shortest_path((0, 0, float("nan")), (10, 10, 0), 100.0)
