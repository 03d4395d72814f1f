"""METAR decoding for the fields the simulator cares about: station, time,
wind, and visibility. Everything else rides along verbatim in `remainder`."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .geo import WindState

_STATION_RE = re.compile(r"^[A-Z][A-Z0-9]{3}$")
_TIME_RE = re.compile(r"^(\d{2})(\d{2})(\d{2})Z$")
_WIND_RE = re.compile(r"^(\d{3}|VRB)(\d{2,3})(?:G(\d{2,3}))?KT$")
_VIS_RE = re.compile(r"^(?:P)?(\d{1,3})(?:/(\d{1,2}))?SM$")


class MalformedMetar(ValueError):
    def __init__(self, missing_field: str, text: str):
        super().__init__(f"METAR missing {missing_field} group: {text!r}")
        self.missing_field = missing_field


@dataclass(slots=True)
class MetarReport:
    station: str
    day: Optional[int]
    hour: Optional[int]
    minute: Optional[int]
    wind: WindState
    visibility_sm: Optional[float]
    cavok: bool
    remainder: str


def parse_metar(text: str) -> MetarReport:
    """Decode a METAR string.

    The station must lead and a WMO wind group (dddss[Ggg]KT or VRBssKT) must
    appear somewhere; their absence raises MalformedMetar naming the field.
    """
    tokens = text.split()
    if not tokens or not _STATION_RE.fullmatch(tokens[0]):
        raise MalformedMetar("station", text)
    station = tokens[0]

    day = hour = minute = None
    wind: Optional[WindState] = None
    visibility: Optional[float] = None
    cavok = False
    leftovers: list[str] = []

    for tok in tokens[1:]:
        if day is None:
            m = _TIME_RE.fullmatch(tok)
            if m:
                day, hour, minute = (int(g) for g in m.groups())
                continue
        if wind is None:
            m = _WIND_RE.fullmatch(tok)
            if m:
                direction = None if m.group(1) == "VRB" else float(m.group(1)) % 360.0
                speed = float(m.group(2))
                gust = float(m.group(3)) if m.group(3) else None
                if speed == 0.0:
                    direction = None
                wind = WindState(direction_deg=direction, speed_kt=speed, gust_kt=gust)
                continue
        if visibility is None and not cavok:
            m = _VIS_RE.fullmatch(tok)
            if m:
                visibility = float(m.group(1))
                if m.group(2):
                    visibility /= float(m.group(2))
                continue
            if tok == "CAVOK":
                cavok = True
                continue
        leftovers.append(tok)

    if wind is None:
        raise MalformedMetar("wind", text)
    return MetarReport(
        station=station,
        day=day, hour=hour, minute=minute,
        wind=wind,
        visibility_sm=visibility,
        cavok=cavok,
        remainder=" ".join(leftovers),
    )
