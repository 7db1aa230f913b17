"""Knowledge-base document model: parsing, validation, serialization.

The document is JSON with four top-level keys: ``objects``, ``sensors``,
``target`` and ``implicitEvents``. parse_kb checks syntax and shape (types,
required keys, identifier lexicon) and returns the in-memory model;
validate() reports semantic violations (duplicates, dangling references,
overlapping ranges, window ordering) as data rather than exceptions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Optional, Union

from .errors import KbDocumentError, KbValidationError

_CLASS_RE = re.compile(r"[A-Z][A-Za-z0-9]*$")
_LOWER_RE = re.compile(r"[a-z][A-Za-z0-9]*$")

TARGET_STATES = ("normal", "abnormal")


@dataclass(frozen=True)
class MeasuredStateRange:
    min: float
    max: float
    state: str


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    states: tuple[str, ...]


@dataclass(frozen=True)
class ObjectDecl:
    class_name: str
    instance_id: str
    attributes: tuple[AttributeDecl, ...]


@dataclass(frozen=True)
class SensorDecl:
    sensor_id: str
    observes_object: str
    observes_attribute: str
    ranges: tuple[MeasuredStateRange, ...]


@dataclass(frozen=True)
class TargetDecl:
    class_name: str
    instance_id: str
    attribute: str
    sensor_id: str
    normal_range: MeasuredStateRange


@dataclass(frozen=True)
class TemporalCondition:
    object: str
    attribute: str
    state: str
    lower: int  # B: window reaches back to t - lower
    upper: int  # A: window ends at t - upper; coincident when both zero

    @property
    def manifestation(self) -> tuple[str, str, str]:
        return (self.object, self.attribute, self.state)

    @property
    def coincident(self) -> bool:
        return self.lower == 0 and self.upper == 0


@dataclass(frozen=True)
class ImplicitEventDecl:
    name: str
    effect_life_span: int
    starting: tuple[TemporalCondition, ...]
    ending: tuple[TemporalCondition, ...]


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str

    def __str__(self):
        return f"{self.kind} [{self.subject}]: {self.message}"


@dataclass(frozen=True)
class KnowledgeBase:
    objects: tuple[ObjectDecl, ...]
    sensors: tuple[SensorDecl, ...]
    target: TargetDecl
    implicit_events: tuple[ImplicitEventDecl, ...]

    def target_object(self) -> ObjectDecl:
        """The target declaration viewed as an object with normal/abnormal states."""
        return ObjectDecl(
            self.target.class_name,
            self.target.instance_id,
            (AttributeDecl(self.target.attribute, TARGET_STATES),),
        )

    def iter_objects(self, include_target: bool = True):
        yield from self.objects
        if include_target:
            yield self.target_object()

    def object_by_instance(self, instance_id: str) -> Optional[ObjectDecl]:
        for obj in self.iter_objects():
            if obj.instance_id == instance_id:
                return obj
        return None

    def sensor_by_id(self, sensor_id: str) -> Union[SensorDecl, TargetDecl, None]:
        if sensor_id == self.target.sensor_id:
            return self.target
        for s in self.sensors:
            if s.sensor_id == sensor_id:
                return s
        return None

    def declared_triples(self) -> set[tuple[str, str, str]]:
        out = set()
        for obj in self.iter_objects():
            for attr in obj.attributes:
                for state in attr.states:
                    out.add((obj.instance_id, attr.name, state))
        return out

    def class_of_instance(self, instance_id: str) -> Optional[str]:
        obj = self.object_by_instance(instance_id)
        return obj.class_name if obj else None

    def observed_pairs(self) -> list[tuple[str, str]]:
        """Every (instance, attribute) pair some sensor observes, target included."""
        pairs = [(s.observes_object, s.observes_attribute) for s in self.sensors]
        pairs.append((self.target.instance_id, self.target.attribute))
        return pairs

    def rescaled(self, granularity: int) -> "KnowledgeBase":
        """Divide every temporal window and lifespan by the step granularity.

        KB temporal values are declared at the default 1-second step
        resolution; coarser replays shrink them proportionally. Values must
        divide evenly.
        """
        if granularity == 1:
            return self

        def div(value, what):
            if value % granularity:
                raise ValueError(
                    f"{what} ({value}) is not divisible by granularity {granularity}"
                )
            return value // granularity

        events = []
        for ev in self.implicit_events:
            events.append(
                replace(
                    ev,
                    effect_life_span=div(ev.effect_life_span, f"{ev.name}.effectLifeSpan"),
                    starting=tuple(
                        replace(c, lower=div(c.lower, f"{ev.name} lower"),
                                upper=div(c.upper, f"{ev.name} upper"))
                        for c in ev.starting
                    ),
                    ending=tuple(
                        replace(c, lower=div(c.lower, f"{ev.name} lower"),
                                upper=div(c.upper, f"{ev.name} upper"))
                        for c in ev.ending
                    ),
                )
            )
        return replace(self, implicit_events=tuple(events))


# -- parsing ---------------------------------------------------------------


def _need(mapping, key, kind, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise KbDocumentError(f"missing key {key!r} in {where}")
    value = mapping[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise KbDocumentError(f"{where}.{key} must be a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise KbDocumentError(f"{where}.{key} must be an integer")
        return value
    if not isinstance(value, kind):
        raise KbDocumentError(f"{where}.{key} must be {kind.__name__}")
    return value


def _ident(text, pattern, role, where):
    if not isinstance(text, str) or not pattern.match(text):
        casing = "capitalized" if pattern is _CLASS_RE else "lower-camel"
        raise KbDocumentError(f"{where}: {role} {text!r} is not a {casing} identifier")
    return text


def _nonneg(value, key, where):
    v = _need({key: value}, key, int, where)
    if v < 0:
        raise KbDocumentError(f"{where}.{key} must be non-negative")
    return v


def _parse_condition(raw, where):
    return TemporalCondition(
        object=_ident(_need(raw, "object", str, where), _LOWER_RE, "instance", where),
        attribute=_ident(_need(raw, "attribute", str, where), _LOWER_RE, "attribute", where),
        state=_ident(_need(raw, "state", str, where), _LOWER_RE, "state", where),
        lower=_nonneg(_need(raw, "lower", int, where), "lower", where),
        upper=_nonneg(_need(raw, "upper", int, where), "upper", where),
    )


def parse_kb(document_text: str) -> KnowledgeBase:
    """Parse a KB document. Raises KbDocumentError on syntax or shape faults;
    semantic problems are left to validate()."""
    try:
        doc = json.loads(document_text)
    except json.JSONDecodeError as e:
        raise KbDocumentError(f"document is not valid JSON: {e.msg}", e.lineno, e.colno) from None
    if not isinstance(doc, dict):
        raise KbDocumentError("document root must be an object")
    for key in ("objects", "sensors", "target", "implicitEvents"):
        if key not in doc:
            raise KbDocumentError(f"missing top-level key {key!r}")

    objects = []
    raw_objects = doc["objects"]
    if not isinstance(raw_objects, list) or not raw_objects:
        raise KbDocumentError("no objects declared")
    for i, raw in enumerate(raw_objects):
        where = f"objects[{i}]"
        attrs = []
        raw_attrs = _need(raw, "attributes", list, where)
        for j, ra in enumerate(raw_attrs):
            aw = f"{where}.attributes[{j}]"
            states = _need(ra, "states", list, aw)
            attrs.append(
                AttributeDecl(
                    _ident(_need(ra, "name", str, aw), _LOWER_RE, "attribute", aw),
                    tuple(_ident(s, _LOWER_RE, "state", aw) for s in states),
                )
            )
        objects.append(
            ObjectDecl(
                _ident(_need(raw, "class", str, where), _CLASS_RE, "class", where),
                _ident(_need(raw, "instance", str, where), _LOWER_RE, "instance", where),
                tuple(attrs),
            )
        )

    sensors = []
    raw_sensors = doc["sensors"]
    if not isinstance(raw_sensors, list) or not raw_sensors:
        raise KbDocumentError("no sensors declared")
    for i, raw in enumerate(raw_sensors):
        where = f"sensors[{i}]"
        ranges = []
        for j, rr in enumerate(_need(raw, "ranges", list, where)):
            rw = f"{where}.ranges[{j}]"
            ranges.append(
                MeasuredStateRange(
                    _need(rr, "min", float, rw),
                    _need(rr, "max", float, rw),
                    _ident(_need(rr, "state", str, rw), _LOWER_RE, "state", rw),
                )
            )
        sensors.append(
            SensorDecl(
                _ident(_need(raw, "id", str, where), _LOWER_RE, "sensor id", where),
                _ident(_need(raw, "object", str, where), _LOWER_RE, "instance", where),
                _ident(_need(raw, "attribute", str, where), _LOWER_RE, "attribute", where),
                tuple(ranges),
            )
        )

    raw_target = doc["target"]
    target = TargetDecl(
        _ident(_need(raw_target, "class", str, "target"), _CLASS_RE, "class", "target"),
        _ident(_need(raw_target, "instance", str, "target"), _LOWER_RE, "instance", "target"),
        _ident(_need(raw_target, "attribute", str, "target"), _LOWER_RE, "attribute", "target"),
        _ident(_need(raw_target, "sensor", str, "target"), _LOWER_RE, "sensor id", "target"),
        MeasuredStateRange(
            _need(raw_target, "normalMin", float, "target"),
            _need(raw_target, "normalMax", float, "target"),
            "normal",
        ),
    )

    events = []
    raw_events = doc["implicitEvents"]
    if not isinstance(raw_events, list):
        raise KbDocumentError("implicitEvents must be an array")
    for i, raw in enumerate(raw_events):
        where = f"implicitEvents[{i}]"
        events.append(
            ImplicitEventDecl(
                _ident(_need(raw, "name", str, where), _CLASS_RE, "event name", where),
                _nonneg(_need(raw, "effectLifeSpan", int, where), "effectLifeSpan", where),
                tuple(
                    _parse_condition(c, f"{where}.starting[{k}]")
                    for k, c in enumerate(_need(raw, "starting", list, where))
                ),
                tuple(
                    _parse_condition(c, f"{where}.ending[{k}]")
                    for k, c in enumerate(_need(raw, "ending", list, where))
                ),
            )
        )

    return KnowledgeBase(tuple(objects), tuple(sensors), target, tuple(events))


# -- validation --------------------------------------------------------------


def validate(kb: KnowledgeBase) -> list[Violation]:
    """All invariant violations, deterministically ordered; empty iff valid."""
    out: list[Violation] = []

    def bad(kind, subject, message):
        out.append(Violation(kind, subject, message))

    seen_instances: dict[str, str] = {}
    for obj in kb.iter_objects():
        subject = f"object {obj.instance_id}"
        if obj.instance_id in seen_instances:
            bad("duplicate-identifier", subject, "instance id declared more than once")
        seen_instances[obj.instance_id] = obj.class_name
        seen_attrs = set()
        for attr in obj.attributes:
            if attr.name in seen_attrs:
                bad("duplicate-identifier", subject, f"attribute {attr.name} declared twice")
            seen_attrs.add(attr.name)
            if not attr.states:
                bad("empty-declaration", subject, f"attribute {attr.name} has no states")
            if len(set(attr.states)) != len(attr.states):
                bad("duplicate-identifier", subject, f"attribute {attr.name} repeats a state")

    seen_sensors = set()
    observed: dict[tuple[str, str], str] = {}
    target_pair = (kb.target.instance_id, kb.target.attribute)
    for s in list(kb.sensors) + [kb.target]:
        sid = s.sensor_id
        if sid in seen_sensors:
            bad("duplicate-identifier", f"sensor {sid}", "sensor id declared more than once")
        seen_sensors.add(sid)

    for s in kb.sensors:
        subject = f"sensor {s.sensor_id}"
        pair = (s.observes_object, s.observes_attribute)
        obj = kb.object_by_instance(s.observes_object)
        attr = None
        if obj is None:
            bad("unknown-reference", subject, f"observed instance {s.observes_object} not declared")
        else:
            attr = next((a for a in obj.attributes if a.name == s.observes_attribute), None)
            if attr is None:
                bad("unknown-reference", subject,
                    f"attribute {s.observes_attribute} not declared on {s.observes_object}")
        if pair == target_pair:
            bad("duplicate-sensor", subject, "target pair is observed by the target sensor")
        elif pair in observed:
            bad("duplicate-sensor", subject,
                f"pair {pair} already observed by {observed[pair]}")
        observed[pair] = s.sensor_id

        if not s.ranges:
            bad("empty-declaration", subject, "sensor declares no ranges")
        for r in s.ranges:
            if r.min > r.max:
                bad("bad-range", subject, f"range for {r.state} has min {r.min} > max {r.max}")
            if attr is not None and r.state not in attr.states:
                bad("unknown-reference", subject,
                    f"range state {r.state} not declared on attribute {s.observes_attribute}")
        ordered = sorted(s.ranges, key=lambda r: (r.min, r.max))
        for a, b in zip(ordered, ordered[1:]):
            if b.min <= a.max:
                bad("overlap", subject,
                    f"ranges for {a.state} and {b.state} overlap on [{b.min}, {min(a.max, b.max)}]")

    if kb.target.normal_range.min > kb.target.normal_range.max:
        bad("bad-range", f"target {kb.target.instance_id}", "normalMin exceeds normalMax")

    triples = kb.declared_triples()
    seen_events = set()
    for ev in kb.implicit_events:
        subject = f"implicitEvent {ev.name}"
        if ev.name in seen_events:
            bad("duplicate-identifier", subject, "event name declared more than once")
        seen_events.add(ev.name)
        if not ev.starting:
            bad("empty-declaration", subject, "no starting conditions")
        if not ev.ending:
            bad("empty-declaration", subject, "no ending conditions")
        if ev.effect_life_span < 0:
            bad("bad-window", subject, "effectLifeSpan must be non-negative")
        for role, conds in (("starting", ev.starting), ("ending", ev.ending)):
            for c in conds:
                if c.manifestation not in triples:
                    bad("unknown-reference", subject,
                        f"{role} condition references undeclared {c.manifestation}")
                if not (0 <= c.upper <= c.lower):
                    bad("bad-window", subject,
                        f"{role} condition window needs 0 <= upper ({c.upper})"
                        f" <= lower ({c.lower})")

    # predicate-name synthesis must stay injective (compiler contract): the
    # camel-case concatenation can collide across triples, events and the
    # handful of reserved program predicates
    from .compiler import (
        EXPLAINED,
        MANIFEST,
        OBS_MARKER,
        event_predicate,
        predicate_name,
        smell_predicate,
    )

    names: dict[str, str] = {
        EXPLAINED: "reserved", OBS_MARKER: "reserved", MANIFEST: "reserved",
        "attribute": "reserved", "state": "reserved",
    }

    def claim(name, key, subject):
        if name in names and names[name] != key:
            bad("ambiguous-predicate", subject,
                f"{key} and {names[name]} both synthesize predicate {name}")
        names[name] = key

    for obj in kb.iter_objects():
        for attr in obj.attributes:
            for state in attr.states:
                claim(
                    predicate_name(obj.class_name, attr.name, state),
                    f"{obj.class_name}/{attr.name}/{state}",
                    f"object {obj.instance_id}",
                )
    for ev in kb.implicit_events:
        subject = f"implicitEvent {ev.name}"
        e = event_predicate(ev.name)
        claim(e, f"event {ev.name}", subject)
        claim(e + "End", f"event {ev.name} (end)", subject)
        claim(smell_predicate(ev.name), f"event {ev.name} (smell)", subject)

    out.sort(key=lambda v: (v.kind, v.subject, v.message))
    return out


def load_kb(document_text: str) -> KnowledgeBase:
    """parse_kb + validate, raising KbValidationError when violations exist."""
    kb = parse_kb(document_text)
    violations = validate(kb)
    if violations:
        raise KbValidationError(violations)
    return kb


# -- serialization -----------------------------------------------------------


def _num(x: float):
    return int(x) if float(x).is_integer() else x


def serialize(kb: KnowledgeBase) -> str:
    """KB document text; parse_kb(serialize(kb)) reproduces the model."""
    doc = {
        "objects": [
            {
                "class": o.class_name,
                "instance": o.instance_id,
                "attributes": [
                    {"name": a.name, "states": list(a.states)} for a in o.attributes
                ],
            }
            for o in kb.objects
        ],
        "sensors": [
            {
                "id": s.sensor_id,
                "object": s.observes_object,
                "attribute": s.observes_attribute,
                "ranges": [
                    {"min": _num(r.min), "max": _num(r.max), "state": r.state}
                    for r in s.ranges
                ],
            }
            for s in kb.sensors
        ],
        "target": {
            "class": kb.target.class_name,
            "instance": kb.target.instance_id,
            "attribute": kb.target.attribute,
            "sensor": kb.target.sensor_id,
            "normalMin": _num(kb.target.normal_range.min),
            "normalMax": _num(kb.target.normal_range.max),
        },
        "implicitEvents": [
            {
                "name": ev.name,
                "effectLifeSpan": ev.effect_life_span,
                "starting": [
                    {"object": c.object, "attribute": c.attribute, "state": c.state,
                     "lower": c.lower, "upper": c.upper}
                    for c in ev.starting
                ],
                "ending": [
                    {"object": c.object, "attribute": c.attribute, "state": c.state,
                     "lower": c.lower, "upper": c.upper}
                    for c in ev.ending
                ],
            }
            for ev in kb.implicit_events
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
