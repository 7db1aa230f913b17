"""Stable-model semantics primitives and the brute-force oracle.

These functions are the reference semantics the solver is checked against:
reduct construction, positive fixpoints, stability checking, and exhaustive
model enumeration. They favour clarity over speed and are meant for small
programs and test oracles.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

from .atoms import Atom, atom
from .errors import AtomBudgetError
from .program import GroundRule


def expand_cardinality(rule: GroundRule) -> list[GroundRule]:
    """Rewrite ``1{pred(lo..hi)}`` into one rule per step in the interval.

    The interval is clamped below at step 1; an interval entirely below
    step 1 is unsatisfiable and yields no rules.
    """
    card = rule.card
    if card is None:
        return [rule]
    if card.hi < 1:
        return []
    out = []
    for i in range(max(1, card.lo), card.hi + 1):
        out.append(GroundRule(rule.head, rule.pos + (atom(card.pred, i),), rule.neg))
    return out


def expand_all(rules: Iterable[GroundRule]) -> list[GroundRule]:
    out = []
    for r in rules:
        out.extend(expand_cardinality(r))
    return out


def gl_reduct(rules: Iterable[GroundRule], candidate: set[Atom]) -> list[GroundRule]:
    """Gelfond-Lifschitz reduct: drop rules blocked by the candidate, strip negation.

    Rules must be cardinality-free (expand first).
    """
    out = []
    for r in rules:
        if r.card is not None:
            raise ValueError("gl_reduct requires cardinality-free rules")
        if any(n in candidate for n in r.neg):
            continue
        out.append(GroundRule(r.head, r.pos) if r.neg else r)
    return out


def least_model(rules: Iterable[GroundRule]) -> tuple[frozenset[Atom], bool]:
    """Minimal model of a positive program.

    Returns (atoms, consistent); consistent is False when some integrity
    constraint's body is contained in the fixpoint.
    """
    rules = list(rules)
    watch: dict[Atom, list[int]] = {}
    missing = []
    for idx, r in enumerate(rules):
        if r.neg or r.card is not None:
            raise ValueError("least_model requires positive, cardinality-free rules")
        missing.append(len(r.pos))
        for a in r.pos:
            watch.setdefault(a, []).append(idx)

    true: set[Atom] = set()
    queue = [r.head for i, r in enumerate(rules) if missing[i] == 0 and r.head is not None]
    violated = any(missing[i] == 0 and r.head is None for i, r in enumerate(rules))
    while queue:
        a = queue.pop()
        if a in true:
            continue
        true.add(a)
        for idx in watch.get(a, ()):
            missing[idx] -= 1
            if missing[idx] == 0:
                head = rules[idx].head
                if head is None:
                    violated = True
                elif head not in true:
                    queue.append(head)
    return frozenset(true), not violated


def is_stable(rules: Iterable[GroundRule], candidate: Iterable[Atom]) -> bool:
    """True iff candidate is the least model of its own reduct and violates
    no integrity constraint. Interval elements are expanded first."""
    candidate = set(candidate)
    expanded = expand_all(rules)
    model, consistent = least_model(gl_reduct(expanded, candidate))
    return consistent and model == candidate


def _derivation_rules(rules):
    return [r for r in rules if r.head is not None]


def well_founded(rules: Iterable[GroundRule]) -> tuple[frozenset[Atom], frozenset[Atom]]:
    """Well-founded model via the alternating fixpoint.

    Returns (true, undefined). Integrity constraints do not participate in
    derivation. Every stable model M satisfies true <= M <= true | undefined.
    """
    derive = _derivation_rules(expand_all(rules))

    def gamma(s):
        model, _ = least_model(gl_reduct(derive, s))
        return model

    true: frozenset[Atom] = frozenset()
    upper = gamma(true)
    while True:
        new_true = gamma(upper)
        new_upper = gamma(new_true)
        if new_true == true and new_upper == upper:
            return true, frozenset(upper - true)
        true, upper = new_true, new_upper


def enumerate_stable(rules: Iterable[GroundRule], max_atoms: int = 20) -> set[frozenset[Atom]]:
    """All stable models by exhaustive subset check via is_stable.

    The well-founded model first fixes every atom it decides; the exhaustive
    sweep then runs over the remaining *undefined* atoms, each candidate
    verified with is_stable. ``max_atoms`` bounds that enumeration space.
    """
    rules = expand_all(rules)
    true, undefined = well_founded(rules)
    if len(undefined) > max_atoms:
        raise AtomBudgetError(
            f"{len(undefined)} undefined atoms exceed the enumeration budget of {max_atoms}"
        )
    undef = sorted(undefined, key=lambda a: a.index)
    models = set()
    for k in range(len(undef) + 1):
        for extra in combinations(undef, k):
            candidate = frozenset(true | set(extra))
            if is_stable(rules, candidate):
                models.add(candidate)
    return models


def program_atoms(rules: Iterable[GroundRule]) -> set[Atom]:
    """Every atom mentioned by the rules (cardinality elements expanded)."""
    out = set()
    for r in expand_all(rules):
        if r.head is not None:
            out.add(r.head)
        out.update(r.pos)
        out.update(r.neg)
    return out
