"""Ground rules and three-part incremental programs.

A :class:`GroundRule` is a normal rule over interned atoms with an optional
lower-bound-1 interval cardinality element ``1{pred(lo..hi)}``. An
:class:`IncrementalProgram` holds the immutable base, the append-only
cumulative per-step rule sets, and the single replaceable volatile constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .atoms import Atom
from .errors import StepOrderError


@dataclass(frozen=True, slots=True)
class Card:
    """Interval element ``1{pred(lo..hi)}``: at least one of pred(lo)..pred(hi)."""

    pred: str
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty cardinality interval {self.lo}..{self.hi}")

    def __str__(self):
        return "1{%s(%d..%d)}" % (self.pred, self.lo, self.hi)


def _dedup(atoms) -> tuple[Atom, ...]:
    return tuple(dict.fromkeys(atoms))


@dataclass(frozen=True, slots=True)
class GroundRule:
    """``head :- pos, not neg, card.`` — head None makes it an integrity constraint."""

    head: Optional[Atom]
    pos: tuple[Atom, ...] = ()
    neg: tuple[Atom, ...] = ()
    card: Optional[Card] = None

    def __post_init__(self):
        object.__setattr__(self, "pos", _dedup(self.pos))
        object.__setattr__(self, "neg", _dedup(self.neg))

    @property
    def is_fact(self) -> bool:
        return self.head is not None and not self.pos and not self.neg and self.card is None

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    def body_atoms(self) -> Iterable[Atom]:
        yield from self.pos
        yield from self.neg

    def __str__(self):
        from .lptext import format_rule

        return format_rule(self)


def fact(head: Atom) -> GroundRule:
    return GroundRule(head)


def constraint(pos=(), neg=(), card=None) -> GroundRule:
    return GroundRule(None, tuple(pos), tuple(neg), card)


class _StepEntry:
    __slots__ = ("step", "rules")

    def __init__(self, step, rules):
        self.step = step
        self.rules = tuple(rules)

    @property
    def first(self):
        return self.step

    @property
    def last(self):
        return self.step


class _SpanEntry:
    """A compressed run of per-step schema rule sets for steps first..last.

    ``schema`` must provide materialize(t), rule_count_range(a, b) and
    head_atom_count_range(a, b); see compiler.StepSchema.
    """

    __slots__ = ("schema", "first", "last")

    def __init__(self, schema, first, last):
        self.schema = schema
        self.first = first
        self.last = last


class _HorizonEntry:
    """A compiled manifestation step: schema rules plus facts and lift rules.

    Rules are exactly compile_step's output; carrying the schema lets the
    solver seed the facts and run the step through the span kernel instead of
    re-deriving the batch structure.
    """

    __slots__ = ("schema", "step", "step_rules")

    def __init__(self, schema, step_rules):
        self.schema = schema
        self.step = step_rules.step
        self.step_rules = step_rules

    @property
    def first(self):
        return self.step

    @property
    def last(self):
        return self.step


class IncrementalProgram:
    """Base / cumulative / volatile program with bookkeeping for metrics.

    The base is sealed by the first cumulative addition (or explicitly). The
    volatile constraint is replaced, never accumulated. Solver state attaches
    to the program via the ``state`` attribute (see solver module).
    """

    def __init__(self):
        self.base: list[GroundRule] = []
        self.entries: list[_StepEntry | _SpanEntry] = []
        self.volatile: Optional[tuple[int, GroundRule]] = None
        self.state = None
        self._sealed = False
        self._rule_count = 0
        self._atom_count = 0
        self._base_heads: set[Atom] = set()

    # -- construction ----------------------------------------------------

    def add_base(self, rules: Iterable[GroundRule]) -> None:
        if self._sealed:
            raise StepOrderError("base is sealed; cumulative steps already added")
        if self.state is not None and self.state.base_done:
            raise StepOrderError("base already evaluated by a previous solve")
        rules = list(rules)
        self.base.extend(rules)
        self._rule_count += len(rules)
        new_heads = {r.head for r in rules if r.head is not None} - self._base_heads
        self._atom_count += len(new_heads)
        self._base_heads |= new_heads

    def seal_base(self) -> None:
        self._sealed = True

    @property
    def last_step(self) -> int:
        return self.entries[-1].last if self.entries else 0

    def add_step(self, t: int, rules: Iterable[GroundRule]) -> None:
        self._check_monotone(t, t)
        self.entries.append(_StepEntry(t, rules))
        entry = self.entries[-1]
        self._rule_count += len(entry.rules)
        self._atom_count += len({r.head for r in entry.rules if r.head is not None})

    def add_span(self, schema, t_from: int, t_to: int) -> None:
        if t_from > t_to:
            return
        self._check_monotone(t_from, t_to)
        self.entries.append(_SpanEntry(schema, t_from, t_to))
        self._rule_count += schema.rule_count_range(t_from, t_to)
        self._atom_count += schema.head_atom_count_range(t_from, t_to)

    def add_horizon(self, schema, step_rules) -> None:
        """add_step for a compiled manifestation step, keeping its schema so
        the solver can evaluate it through the kernel."""
        self._check_monotone(step_rules.step, step_rules.step)
        self.entries.append(_HorizonEntry(schema, step_rules))
        self._rule_count += len(step_rules.ordered)
        self._atom_count += len({r.head for r in step_rules.ordered if r.head is not None})

    def _check_monotone(self, first, last):
        self.seal_base()
        if first < 1:
            raise StepOrderError(f"steps start at 1, got {first}")
        if first <= self.last_step:
            raise StepOrderError(
                f"step {first} not greater than last cumulative step {self.last_step}"
            )

    def set_volatile(self, t: int, rule: GroundRule) -> None:
        if not rule.is_constraint:
            raise ValueError("volatile part must be an integrity constraint")
        self.volatile = (t, rule)

    # -- inspection ------------------------------------------------------

    @property
    def ground_rule_count(self) -> int:
        return self._rule_count + (1 if self.volatile else 0)

    @property
    def ground_atom_count(self) -> int:
        """Distinct ground atoms the program introduces as heads or facts."""
        return self._atom_count

    def iter_rules(self) -> Iterable[GroundRule]:
        """Materialize every rule (spans expanded); volatile excluded."""
        yield from self.base
        for entry in self.entries:
            if isinstance(entry, _StepEntry):
                yield from entry.rules
            elif isinstance(entry, _HorizonEntry):
                yield from entry.step_rules.ordered
            else:
                for t in range(entry.first, entry.last + 1):
                    yield from entry.schema.materialize(t)[2]

    def all_rules(self) -> list[GroundRule]:
        rules = list(self.iter_rules())
        if self.volatile:
            rules.append(self.volatile[1])
        return rules
