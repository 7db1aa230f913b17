"""Sensor samples to manifestations: time mapping and change detection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Optional, TextIO, Union

from .errors import StreamError, UnclassifiableValueError
from .kb import KnowledgeBase, SensorDecl, TargetDecl


@dataclass(frozen=True)
class SensorSample:
    timestamp: datetime
    sensor_id: str
    value: float


@dataclass(frozen=True)
class Manifestation:
    """An explicit event: (object instance, attribute, state) at a timestep."""

    object: str
    attribute: str
    state: str
    step: int

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.object, self.attribute, self.state)


class StateTracker:
    """Last emitted state per observed (object, attribute) pair."""

    def __init__(self):
        self._last: dict[tuple[str, str], str] = {}

    def last(self, obj: str, attribute: str) -> Optional[str]:
        return self._last.get((obj, attribute))

    def update(self, obj: str, attribute: str, state: str) -> None:
        self._last[(obj, attribute)] = state

    def __len__(self):
        return len(self._last)


def to_timestep(ts: datetime, origin: datetime, granularity: int) -> int:
    """max(1, floor((ts - origin) / granularity)); the origin maps to step 1."""
    if granularity < 1:
        raise ValueError("granularity must be a positive number of seconds")
    delta = (ts - origin).total_seconds()
    if delta < 0:
        raise ValueError(f"timestamp {ts.isoformat()} precedes the stream origin")
    return max(1, int(delta // granularity))


def classify(value: float, sensor: Union[SensorDecl, TargetDecl]) -> str:
    """State whose inclusive [min, max] range contains the value.

    The target sensor is two-state by construction: anything outside the
    normal range is abnormal.
    """
    if isinstance(sensor, TargetDecl):
        r = sensor.normal_range
        return "normal" if r.min <= value <= r.max else "abnormal"
    for r in sensor.ranges:
        if r.min <= value <= r.max:
            return r.state
    raise UnclassifiableValueError(
        f"value {value} of sensor {sensor.sensor_id} falls in no declared range"
    )


def detect(
    sample: SensorSample,
    tracker: StateTracker,
    kb: KnowledgeBase,
    origin: datetime,
    granularity: int,
) -> Optional[Manifestation]:
    """Manifestation when the sample's state differs from the last emitted one
    (or none was emitted yet); updates the tracker on emission."""
    sensor = kb.sensor_by_id(sample.sensor_id)
    if sensor is None:
        raise StreamError(f"unknown sensor id {sample.sensor_id!r}")
    if isinstance(sensor, TargetDecl):
        obj, attribute = sensor.instance_id, sensor.attribute
    else:
        obj, attribute = sensor.observes_object, sensor.observes_attribute
    state = classify(sample.value, sensor)
    if tracker.last(obj, attribute) == state:
        return None
    tracker.update(obj, attribute, state)
    return Manifestation(obj, attribute, state, to_timestep(sample.timestamp, origin, granularity))


def read_samples(source: Union[str, TextIO]) -> list[tuple[int, SensorSample]]:
    """Parse a sample-stream CSV; returns (row_number, sample) pairs.

    Row numbers are 1-based file lines (header is line 1) for error reporting.
    """
    close = False
    if isinstance(source, str):
        source = open(source, newline="", encoding="utf-8")
        close = True
    try:
        reader = csv.reader(source)
        try:
            header = next(reader)
        except StopIteration:
            raise StreamError("empty sample stream") from None
        if [h.strip() for h in header] != ["timestamp", "sensorId", "value"]:
            raise StreamError(
                "header must be exactly 'timestamp,sensorId,value'", row=1
            )
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise StreamError(f"expected 3 columns, got {len(row)}", row=lineno)
            ts_text, sensor_id, value_text = (c.strip() for c in row)
            try:
                ts = datetime.fromisoformat(ts_text)
            except ValueError:
                raise StreamError(f"bad ISO-8601 timestamp {ts_text!r}", row=lineno) from None
            try:
                value = float(value_text)
            except ValueError:
                raise StreamError(f"bad numeric value {value_text!r}", row=lineno) from None
            out.append((lineno, SensorSample(ts, sensor_id, value)))
        return out
    finally:
        if close:
            source.close()


def manifestations_by_step(
    samples: Iterable[tuple[int, SensorSample]],
    kb: KnowledgeBase,
    granularity: int,
) -> list[tuple[int, list[Manifestation]]]:
    """Run change detection over a sorted stream, grouping results per step.

    The origin is the first sample's timestamp. Raises StreamError with the
    offending row for unsorted rows, unknown sensors and unclassifiable values.
    """
    tracker = StateTracker()
    origin = None
    previous = None
    grouped: dict[int, list[Manifestation]] = {}
    for lineno, sample in samples:
        if origin is None:
            origin = sample.timestamp
        if previous is not None and sample.timestamp < previous:
            raise StreamError("stream is not sorted by timestamp", row=lineno)
        previous = sample.timestamp
        try:
            m = detect(sample, tracker, kb, origin, granularity)
        except (UnclassifiableValueError, StreamError) as e:
            raise StreamError(str(e), row=lineno) from None
        if m is not None:
            grouped.setdefault(m.step, []).append(m)
    return sorted(grouped.items())
