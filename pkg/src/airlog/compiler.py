"""Knowledge base to ground logic program translation.

compile_base emits the time-independent membership facts. compile_step emits
one step's worth of ground rules: manifestation facts with their lifting
rules, implicit-event start/end/progression rules, smell derivation with
lingering via interval cardinality, explanation rules, and target-state
inertia guarded by the observation marker. compile_volatile emits the
per-horizon explanation constraint.

Per-step rules for manifestation-free steps all share one shape; StepSchema
captures that shape once (with per-rule step offsets and validity thresholds)
so the solver can run long step spans through its array kernel. compile_step
materializes from the same schema, keeping both routes identical by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .atoms import atom
from .kb import KnowledgeBase, TemporalCondition
from .observation import Manifestation
from .program import Card, GroundRule

EXPLAINED = "explained"
OBS_MARKER = "obsAir"
MANIFEST = "manifestation"


def _lcfirst(s: str) -> str:
    return s[0].lower() + s[1:]


def _ucfirst(s: str) -> str:
    return s[0].upper() + s[1:]


def predicate_name(class_name: str, attribute: str, state: str) -> str:
    """Camel-case predicate for a (class, attribute, state) triple."""
    return _lcfirst(class_name) + _ucfirst(attribute) + _ucfirst(state)


def event_predicate(event_name: str) -> str:
    return _lcfirst(event_name)


def smell_predicate(event_name: str) -> str:
    return "smell" + _ucfirst(event_name)


@dataclass(frozen=True)
class TemplateLit:
    pred: str
    off: int  # step offset relative to t, always <= 0
    positive: bool = True


@dataclass(frozen=True)
class TemplateCard:
    pred: str
    lo_off: int
    hi_off: int


@dataclass(frozen=True)
class TemplateRule:
    head: str
    lits: tuple[TemplateLit, ...]
    card: Optional[TemplateCard] = None

    @property
    def min_step(self) -> int:
        """First step at which the rule can exist (no positive reference
        below step 1; interval upper bound at or above step 1)."""
        lo = 1
        for lit in self.lits:
            if lit.positive and 1 - lit.off > lo:
                lo = 1 - lit.off
        if self.card is not None and 1 - self.card.hi_off > lo:
            lo = 1 - self.card.hi_off
        return lo

    def instantiate(self, t: int) -> GroundRule:
        pos = tuple(atom(l.pred, t + l.off) for l in self.lits if l.positive)
        neg = tuple(atom(l.pred, t + l.off) for l in self.lits if not l.positive)
        card = None
        if self.card is not None:
            card = Card(self.card.pred, max(1, t + self.card.lo_off), t + self.card.hi_off)
        return GroundRule(atom(self.head, t), pos, neg, card)


@dataclass(frozen=True)
class StepRules:
    """One compiled step: facts (manifestations, observation markers), rules,
    and the canonical emission order over both."""

    step: int
    facts: tuple[GroundRule, ...]
    rules: tuple[GroundRule, ...]
    ordered: tuple[GroundRule, ...]


class StepSchema:
    """The per-step rule shape of a knowledge base."""

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self.air_normal = predicate_name(kb.target.class_name, kb.target.attribute, "normal")
        self.air_abnormal = predicate_name(kb.target.class_name, kb.target.attribute, "abnormal")
        self._class_lower = {
            obj.instance_id: _lcfirst(obj.class_name) for obj in kb.iter_objects()
        }
        self.templates: list[TemplateRule] = []
        self._build(kb)
        self._eval_order = self._topo_order()
        self._rule_steps = sorted(tr.min_step for tr in self.templates)
        head_first: dict[str, int] = {}
        for tr in self.templates:
            prior = head_first.get(tr.head)
            if prior is None or tr.min_step < prior:
                head_first[tr.head] = tr.min_step
        self._head_steps = sorted(head_first.values())
        self.smell_preds = sorted(smell_predicate(ev.name) for ev in kb.implicit_events)

    @property
    def projection_preds(self) -> list[str]:
        return [self.air_normal, self.air_abnormal] + self.smell_preds

    # -- construction ------------------------------------------------------

    def _condition_parts(self, event: str, role: str, conds: Iterable[TemporalCondition]):
        """Literals, at most one inline interval, and aux rules for the rest."""
        lits: list[TemplateLit] = []
        card: Optional[TemplateCard] = None
        aux: list[TemplateRule] = []
        windowed = 0
        for c in conds:
            pred = predicate_name(self.kb.class_of_instance(c.object), c.attribute, c.state)
            if c.coincident:
                lits.append(TemplateLit(pred, 0))
                continue
            windowed += 1
            tc = TemplateCard(pred, -c.lower, -c.upper)
            if card is None:
                card = tc
            else:
                aux_pred = f"{event}{role}Win{windowed}"
                aux.append(TemplateRule(aux_pred, (), tc))
                lits.append(TemplateLit(aux_pred, 0))
        return lits, card, aux

    def _build(self, kb: KnowledgeBase):
        event_rules: list[TemplateRule] = []
        smell_rules: list[TemplateRule] = []
        explain_rules: list[TemplateRule] = []
        for ev in kb.implicit_events:
            e = event_predicate(ev.name)
            end = e + "End"
            smell = smell_predicate(ev.name)

            lits, card, aux = self._condition_parts(e, "Start", ev.starting)
            event_rules.extend(aux)
            event_rules.append(TemplateRule(e, tuple(lits), card))

            lits, card, aux = self._condition_parts(e, "End", ev.ending)
            event_rules.extend(aux)
            event_rules.append(TemplateRule(end, (TemplateLit(e, -1),) + tuple(lits), card))

            event_rules.append(
                TemplateRule(e, (TemplateLit(e, -1), TemplateLit(end, 0, positive=False)))
            )

            smell_rules.append(
                TemplateRule(smell, (TemplateLit(self.air_abnormal, 0), TemplateLit(e, 0)))
            )
            smell_rules.append(
                TemplateRule(
                    smell,
                    (TemplateLit(self.air_abnormal, 0), TemplateLit(smell, -1)),
                    TemplateCard(end, -ev.effect_life_span, 0),
                )
            )
            explain_rules.append(TemplateRule(EXPLAINED, (TemplateLit(smell, 0),)))

        explain_rules.append(TemplateRule(EXPLAINED, (TemplateLit(self.air_abnormal, 0),)))
        explain_rules.append(TemplateRule(EXPLAINED, (TemplateLit(self.air_normal, 0),)))

        inertia = [
            TemplateRule(
                self.air_normal,
                (TemplateLit(self.air_normal, -1), TemplateLit(OBS_MARKER, 0, positive=False)),
            ),
            TemplateRule(
                self.air_abnormal,
                (TemplateLit(self.air_abnormal, -1), TemplateLit(OBS_MARKER, 0, positive=False)),
            ),
        ]
        self.templates = event_rules + smell_rules + explain_rules + inertia

    def _topo_order(self) -> list[TemplateRule]:
        """Templates reordered so same-step dependencies evaluate first."""
        heads = {tr.head for tr in self.templates}
        deps: dict[str, set[str]] = {h: set() for h in heads}
        for tr in self.templates:
            for lit in tr.lits:
                if lit.off == 0 and lit.pred in heads and lit.pred != tr.head:
                    deps[tr.head].add(lit.pred)
            if tr.card is not None and tr.card.hi_off == 0 and tr.card.pred in heads:
                deps[tr.head].add(tr.card.pred)
        emitted_at = {}
        for i, tr in enumerate(self.templates):
            emitted_at.setdefault(tr.head, i)
        order: list[str] = []
        placed: set[str] = set()
        remaining = set(heads)
        while remaining:
            ready = sorted(
                (h for h in remaining if deps[h] <= placed),
                key=lambda h: emitted_at[h],
            )
            if not ready:
                raise ValueError("cyclic same-step dependencies in step schema")
            for h in ready:
                order.append(h)
                placed.add(h)
                remaining.discard(h)
        rank = {h: i for i, h in enumerate(order)}
        return sorted(self.templates, key=lambda tr: rank[tr.head])

    def eval_order_rules(self) -> list[TemplateRule]:
        return self._eval_order

    # -- materialization and counting ---------------------------------------

    def lift_rule(self, m: Manifestation) -> GroundRule:
        """r1 instance: the manifestation fact lifts to its camel-case predicate."""
        pred = predicate_name(
            self.kb.class_of_instance(m.object), m.attribute, m.state
        )
        return GroundRule(
            atom(pred, m.step),
            (
                atom(MANIFEST, m.object, m.attribute, m.state, m.step),
                atom(self._class_lower[m.object], m.object),
            ),
        )

    def materialize(self, t: int, manifestations: Iterable[Manifestation] = ()):
        """(facts, rules, ordered) for step t; ordered is the emission order."""
        target_pair = (self.kb.target.instance_id, self.kb.target.attribute)
        facts: list[GroundRule] = []
        rules: list[GroundRule] = []
        ordered: list[GroundRule] = []
        obs_emitted = False
        for m in sorted(manifestations, key=lambda m: m.triple):
            if m.step != t:
                raise ValueError(f"manifestation {m} does not belong to step {t}")
            mf = GroundRule(atom(MANIFEST, m.object, m.attribute, m.state, m.step))
            lift = self.lift_rule(m)
            facts.append(mf)
            rules.append(lift)
            ordered += [mf, lift]
            if (m.object, m.attribute) == target_pair and not obs_emitted:
                marker = GroundRule(atom(OBS_MARKER, t))
                facts.append(marker)
                ordered.append(marker)
                obs_emitted = True
        for tr in self.templates:
            if t >= tr.min_step:
                rule = tr.instantiate(t)
                rules.append(rule)
                ordered.append(rule)
        return facts, rules, ordered

    @staticmethod
    def _range_total(thresholds: list[int], a: int, b: int) -> int:
        total = 0
        for tau in thresholds:
            if tau > b:
                break
            total += b - max(a, tau) + 1
        return total

    def rule_count_range(self, a: int, b: int) -> int:
        return self._range_total(self._rule_steps, a, b)

    def head_atom_count_range(self, a: int, b: int) -> int:
        return self._range_total(self._head_steps, a, b)


@lru_cache(maxsize=16)
def step_schema(kb: KnowledgeBase) -> StepSchema:
    return StepSchema(kb)


def compile_base(kb: KnowledgeBase) -> list[GroundRule]:
    """Membership facts: class(instance), attribute(name), state(name)."""
    facts = [
        GroundRule(atom(_lcfirst(obj.class_name), obj.instance_id))
        for obj in kb.iter_objects()
    ]
    seen_attrs: dict[str, None] = {}
    seen_states: dict[str, None] = {}
    for obj in kb.iter_objects():
        for attr in obj.attributes:
            seen_attrs.setdefault(attr.name)
            for state in attr.states:
                seen_states.setdefault(state)
    facts += [GroundRule(atom("attribute", name)) for name in seen_attrs]
    facts += [GroundRule(atom("state", name)) for name in seen_states]
    return facts


def compile_step(
    kb: KnowledgeBase,
    t: int,
    manifestations: Iterable[Manifestation] = (),
    schema: Optional[StepSchema] = None,
) -> StepRules:
    if t < 1:
        raise ValueError("steps start at 1")
    if schema is None:
        schema = step_schema(kb)
    facts, rules, ordered = schema.materialize(t, manifestations)
    return StepRules(t, tuple(facts), tuple(rules), tuple(ordered))


def compile_volatile(t: int) -> GroundRule:
    """The horizon constraint: every solved step must be explained."""
    if t < 1:
        raise ValueError("steps start at 1")
    return GroundRule(None, neg=(atom(EXPLAINED, t),))
