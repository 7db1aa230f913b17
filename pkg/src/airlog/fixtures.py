"""Bundled kitchen fixtures and deterministic synthetic streams."""

from __future__ import annotations

from datetime import datetime, timedelta
from importlib.resources import files

from .kb import KnowledgeBase, load_kb

_DATA = files(__package__) / "data"

KITCHEN_KB = "kitchen.json"
KITCHEN_3DAY = "kitchen_3day.csv"
KITCHEN_5DAY = "kitchen_5day.csv"


def fixture_path(name: str) -> str:
    return str(_DATA / name)


def kitchen_kb() -> KnowledgeBase:
    return load_kb((_DATA / KITCHEN_KB).read_text(encoding="utf-8"))


def kitchen_stream_text(days: int = 3) -> str:
    name = KITCHEN_3DAY if days == 3 else KITCHEN_5DAY
    return (_DATA / name).read_text(encoding="utf-8")


def synthetic_stream(
    n_horizons: int = 2000,
    gap_seconds: int = 30,
    start: str = "2024-03-04T07:00:00",
) -> str:
    """CSV text for a long alternating-gas stream over the kitchen KB.

    The first horizon carries initial states for every observed pair; each
    later horizon flips the gas state, with a trash-bin open/close cycle
    woven in every 25 horizons so event rules get exercised too.
    """
    origin = datetime.fromisoformat(start)
    rows = ["timestamp,sensorId,value"]

    def add(ts: datetime, sensor: str, value) -> None:
        rows.append(f"{ts.isoformat()},{sensor},{value}")

    for sensor, value in (
        ("powerSensor1", 0),
        ("motionSensor1", 0),
        ("doorSensor1", 0),
        ("lightSensor1", 400),
        ("tempSensor1", 2),
        ("gasSensor1", 10),
    ):
        add(origin, sensor, value)

    for k in range(1, n_horizons):
        ts = origin + timedelta(seconds=k * gap_seconds)
        add(ts, "gasSensor1", 250 if k % 2 else 10)
        phase = k % 100
        if phase == 25:
            add(ts, "doorSensor1", 1)
            add(ts, "lightSensor1", 5)
        elif phase == 50:
            add(ts, "doorSensor1", 0)
        elif phase == 75:
            add(ts, "doorSensor1", 1)
            add(ts, "lightSensor1", 450)
        elif phase == 0:
            add(ts, "doorSensor1", 0)
    return "\n".join(rows) + "\n"
