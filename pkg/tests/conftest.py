import json
from pathlib import Path

import pytest

from ctafsim.dynamics import ControlLimits
from ctafsim.geo import default_airfield

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture
def airfield():
    return default_airfield()


@pytest.fixture
def pattern_limits():
    """Maneuvering limits the demo scenario flies with (20 deg bank turns)."""
    return ControlLimits(max_turn_rate_dps=6.0)


@pytest.fixture
def demo_scenario_path():
    return SCENARIOS / "demo_stage.json"


@pytest.fixture
def demo_scenario_dict(demo_scenario_path):
    return json.loads(demo_scenario_path.read_text())
