"""Scenario files: the JSON schema the engine loads, with cross-reference
validation that reports a field path on failure."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from .dynamics import ControlLimits
from .geo import AirfieldModel, LocalPoint, Runway, Side, WindState
from .metar import parse_metar
from .planner import PlannerConfig
from .radio import IntentKind
from .rules import RuleConfig
from .safety import SafetyConfig


class ScenarioError(ValueError):
    """Scenario failed validation; message carries the offending field path."""


class RunwaySpec(BaseModel):
    designator: str
    threshold_xyz: tuple[float, float, float]
    heading_deg: float
    length_m: float
    pattern_side: Literal["left", "right"] = "left"


class AirfieldSpec(BaseModel):
    name: str
    runways: list[RunwaySpec]
    pattern_altitude_m: float = 300.0
    pattern_width_m: float = 1000.0
    calm_wind_runway: str


class WindSpec(BaseModel):
    direction_deg: Optional[float] = None
    speed_kt: float = 0.0
    gust_kt: Optional[float] = None


class GoalSpec(BaseModel):
    kind: Literal[
        "landing", "low_approach", "takeoff", "remain_in_pattern",
        "change_runway", "none",
    ] = "none"
    runway: Optional[str] = None


class HeardIntentSpec(BaseModel):
    from_agent: Optional[str] = None
    kind: Optional[str] = None
    runway: Optional[str] = None


class ScriptWhenSpec(BaseModel):
    heard_intent: HeardIntentSpec


class ScriptActionSpec(BaseModel):
    broadcast: Optional[str] = None
    set_goal: Optional[GoalSpec] = None
    hold_course: Optional[bool] = None


class ScriptStepSpec(BaseModel):
    at_s: Optional[float] = None
    when: Optional[ScriptWhenSpec] = None
    action: ScriptActionSpec

    @model_validator(mode="after")
    def _one_trigger(self):
        if (self.at_s is None) == (self.when is None):
            raise ValueError("script step needs exactly one of at_s or when")
        return self


class AgentSpec(BaseModel):
    id: str
    kind: Literal["ai", "scripted", "human"]
    x: float
    y: float
    z: float
    heading_deg: float
    speed_mps: float
    goal: GoalSpec = Field(default_factory=GoalSpec)
    script: list[ScriptStepSpec] = Field(default_factory=list)


class PlannerSpec(BaseModel):
    iterations: int = 2000
    max_depth: int = 12
    uct_c: float = 1.414
    discount: float = 0.95
    stl_penalty_weight: float = 10.0
    progress_weight: float = 1.0
    social_weight: float = 0.5
    replan_period_s: float = 5.0


class SafetySpec(BaseModel):
    enabled: bool = True
    d_safe_m: float = 300.0
    h_safe_m: float = 100.0
    horizon_s: float = 60.0


class LimitsSpec(BaseModel):
    min_speed_mps: float = 25.0
    cruise_speed_mps: float = 50.0
    max_speed_mps: float = 60.0
    max_turn_rate_dps: float = 3.0
    max_climb_mps: float = 3.5
    max_descent_mps: float = 5.0
    accel_mps2: float = 1.0


class ScenarioSpec(BaseModel):
    airfield: AirfieldSpec
    metar: Optional[str] = None
    wind: Optional[WindSpec] = None
    dt_s: float = 1.0
    seed: int = 0
    time_limit_s: float = 900.0
    agents: list[AgentSpec]
    planner: PlannerSpec = Field(default_factory=PlannerSpec)
    safety: SafetySpec = Field(default_factory=SafetySpec)
    limits: LimitsSpec = Field(default_factory=LimitsSpec)


class Scenario:
    """A validated scenario with domain objects built from the spec."""

    def __init__(self, spec: ScenarioSpec, raw: dict):
        self.spec = spec
        self.raw = raw
        self.airfield = _build_airfield(spec.airfield)
        self.wind = _build_wind(spec)
        self.limits = ControlLimits(**spec.limits.model_dump())
        self.planner_config = PlannerConfig(
            iterations=spec.planner.iterations,
            max_depth=spec.planner.max_depth,
            uct_c=spec.planner.uct_c,
            discount=spec.planner.discount,
            stl_penalty_weight=spec.planner.stl_penalty_weight,
            progress_weight=spec.planner.progress_weight,
            social_weight=spec.planner.social_weight,
            rng_seed=spec.seed,
        )
        self.replan_period_s = spec.planner.replan_period_s
        self.safety_config = SafetyConfig(
            d_safe_m=spec.safety.d_safe_m,
            h_safe_m=spec.safety.h_safe_m,
            horizon_s=spec.safety.horizon_s,
        )
        self.safety_enabled = spec.safety.enabled
        self.rule_config = RuleConfig(
            d_min_m=spec.safety.d_safe_m, h_min_m=spec.safety.h_safe_m
        )
        _cross_validate(spec, self.airfield)

    @property
    def dt_s(self) -> float:
        return self.spec.dt_s

    @property
    def seed(self) -> int:
        return self.spec.seed

    @property
    def time_limit_s(self) -> float:
        return self.spec.time_limit_s


def _build_airfield(spec: AirfieldSpec) -> AirfieldModel:
    runways = [
        Runway(
            designator=r.designator,
            threshold=LocalPoint(*r.threshold_xyz),
            heading_deg=r.heading_deg,
            length_m=r.length_m,
            pattern_side=Side.LEFT if r.pattern_side == "left" else Side.RIGHT,
        )
        for r in spec.runways
    ]
    field = AirfieldModel(
        name=spec.name,
        runways=runways,
        pattern_altitude_m=spec.pattern_altitude_m,
        pattern_width_m=spec.pattern_width_m,
        calm_wind_runway=spec.calm_wind_runway,
    )
    try:
        field.validate()
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"airfield: {exc}") from exc
    return field


def _build_wind(spec: ScenarioSpec) -> WindState:
    if spec.metar is not None:
        try:
            return parse_metar(spec.metar).wind
        except ValueError as exc:
            raise ScenarioError(f"metar: {exc}") from exc
    if spec.wind is not None:
        wind = WindState(spec.wind.direction_deg, spec.wind.speed_kt, spec.wind.gust_kt)
        wind.validate()
        return wind
    return WindState(direction_deg=None, speed_kt=0.0)


def _cross_validate(spec: ScenarioSpec, airfield: AirfieldModel) -> None:
    seen: set[str] = set()
    for i, agent in enumerate(spec.agents):
        path = f"agents[{i}]"
        if agent.id in seen:
            raise ScenarioError(f"{path}.id: duplicate agent id {agent.id!r}")
        seen.add(agent.id)
        if agent.goal.runway is not None:
            try:
                airfield.runway(agent.goal.runway)
            except KeyError as exc:
                raise ScenarioError(f"{path}.goal.runway: {exc}") from exc
        for j, step in enumerate(agent.script):
            goal = step.action.set_goal
            if goal is not None and goal.runway is not None:
                try:
                    airfield.runway(goal.runway)
                except KeyError as exc:
                    raise ScenarioError(
                        f"{path}.script[{j}].action.set_goal.runway: {exc}"
                    ) from exc
    if not spec.agents:
        raise ScenarioError("agents: scenario needs at least one agent")


def goal_intent(goal: GoalSpec):
    from .radio import PilotIntent

    return PilotIntent(IntentKind(goal.kind), goal.runway)


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> Scenario:
    try:
        spec = ScenarioSpec.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ScenarioError(f"{loc}: {first['msg']}") from exc
    return Scenario(spec, raw)
