"""ctafsim: a non-towered-airfield traffic simulator with an AI pattern pilot.

The AI flies by predicting other traffic, searching motion primitives under
temporal-logic flight rules, passing every plan through an independent
separation filter, and coordinating over a text CTAF channel.
"""

__version__ = "0.1.0"

from .geo import (  # noqa: F401
    AirfieldModel,
    LocalPoint,
    PatternLeg,
    Runway,
    Side,
    WindState,
    classify_leg,
    default_airfield,
    leg_headings,
    pattern_waypoints,
    preferred_runway,
)
from .dynamics import (  # noqa: F401
    AircraftState,
    ControlLimits,
    MotionPrimitive,
    default_primitive_set,
    follow_waypoints,
    step,
)
from .radio import (  # noqa: F401
    PilotIntent,
    RadioCall,
    UnparseableCall,
    generate_call,
    intent_of_call,
    parse_call,
)
from .metar import MetarReport, parse_metar  # noqa: F401
from .stl import Trace, brute_force_satisfaction, robustness  # noqa: F401
from .planner import Plan, PlannerConfig, plan, uct_score  # noqa: F401
from .safety import SafetyConfig, extrapolate_linear, filter_plan, min_projected_distance  # noqa: F401
from .scenario import Scenario, ScenarioError, load_scenario  # noqa: F401
from .engine import Engine, run_scenario  # noqa: F401
