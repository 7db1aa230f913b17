"""Textual ground-program format.

One rule per line::

    head :- posLit, ..., not negLit, ..., 1{pred(a..b)}.
    head.
    :- body.
    % comment

Atoms are ``name`` or ``name(arg1,...,argN)`` with integer or lower-camel
symbol arguments. Formatting and parsing round-trip.
"""

from __future__ import annotations

import re

from .atoms import Atom, atom
from .errors import ProgramTextError
from .program import Card, GroundRule

_NAME = r"[A-Za-z][A-Za-z0-9]*"
_ATOM_RE = re.compile(rf"({_NAME})(?:\(([^()]*)\))?\s*")
_CARD_RE = re.compile(rf"1\{{\s*({_NAME})\(\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*\)\s*\}}\s*")
_INT_RE = re.compile(r"-?\d+$")


def format_atom(a: Atom) -> str:
    return str(a)


def format_rule(rule: GroundRule) -> str:
    body = [format_atom(a) for a in rule.pos]
    body += ["not " + format_atom(a) for a in rule.neg]
    if rule.card is not None:
        body.append(str(rule.card))
    if rule.head is None:
        return ":- " + ", ".join(body) + "."
    if not body:
        return format_atom(rule.head) + "."
    return format_atom(rule.head) + " :- " + ", ".join(body) + "."


def format_program(rules) -> str:
    return "\n".join(format_rule(r) for r in rules) + "\n"


def _parse_args(text, lineno):
    args = []
    for raw in text.split(","):
        raw = raw.strip()
        if not raw:
            raise ProgramTextError("empty atom argument", lineno)
        if _INT_RE.match(raw):
            args.append(int(raw))
        elif re.fullmatch(_NAME, raw) and raw[0].islower():
            args.append(raw)
        else:
            raise ProgramTextError(f"bad atom argument {raw!r}", lineno)
    return tuple(args)


def _parse_atom_at(text, pos, lineno):
    m = _ATOM_RE.match(text, pos)
    if not m:
        raise ProgramTextError(f"expected atom at: {text[pos:pos + 30]!r}", lineno)
    name, argtext = m.group(1), m.group(2)
    args = _parse_args(argtext, lineno) if argtext is not None else ()
    return atom(name, *args), m.end()


def parse_rule(line: str, lineno: int | None = None) -> GroundRule:
    text = line.strip()
    if not text.endswith("."):
        raise ProgramTextError("rule must end with '.'", lineno)
    text = text[:-1].strip()

    head = None
    if text.startswith(":-"):
        body_text = text[2:].strip()
    elif ":-" in text:
        head_text, body_text = text.split(":-", 1)
        head, end = _parse_atom_at(head_text.strip(), 0, lineno)
        if head_text.strip()[end:].strip():
            raise ProgramTextError("trailing text after rule head", lineno)
        body_text = body_text.strip()
    else:
        head, end = _parse_atom_at(text, 0, lineno)
        if text[end:].strip():
            raise ProgramTextError("trailing text after fact", lineno)
        return GroundRule(head)

    pos_atoms, neg_atoms, card = [], [], None
    i = 0
    while i < len(body_text):
        if body_text[i].isspace() or body_text[i] == ",":
            i += 1
            continue
        m = _CARD_RE.match(body_text, i)
        if m:
            if card is not None:
                raise ProgramTextError("at most one cardinality element per rule", lineno)
            lo, hi = int(m.group(2)), int(m.group(3))
            try:
                card = Card(m.group(1), lo, hi)
            except ValueError as e:
                raise ProgramTextError(str(e), lineno) from None
            i = m.end()
            continue
        negated = False
        if body_text.startswith("not ", i):
            negated = True
            i += 4
        a, i = _parse_atom_at(body_text, i, lineno)
        (neg_atoms if negated else pos_atoms).append(a)

    try:
        return GroundRule(head, tuple(pos_atoms), tuple(neg_atoms), card)
    except ValueError as e:
        raise ProgramTextError(str(e), lineno) from None


def parse_program(text: str) -> list[GroundRule]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        rules.append(parse_rule(stripped, lineno))
    return rules
