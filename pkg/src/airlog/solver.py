"""Stratum-wise fixpoint solver for locally stratified programs.

Two cooperating evaluation paths:

* generic: step-free programs (hand-written rule sets, the random-program
  acceptance corpus) get exact atom-level stratification via SCC analysis of
  the ground dependency graph, rejecting any cycle through negation.
* temporal: cumulative programs whose step-``t`` rules all carry ``t`` as the
  head's final integer argument. Steps are evaluated in order against a
  predicate/step truth matrix; per-step batches are stratified at the
  predicate level over same-step dependencies, and long manifestation-free
  spans run through the compiled kernel (see kernels module).

Both paths produce the unique perfect model; non-stratified input raises
UnsupportedProgramError rather than entering a search.
"""

from __future__ import annotations

import numpy as np

from ._graph import tarjan_scc
from .atoms import Atom, atom
from .errors import UnsupportedProgramError
from .kernels import get_span_evaluator
from .program import GroundRule, IncrementalProgram, _HorizonEntry, _StepEntry
from .semantics import expand_all


class AnswerSet:
    """A stable model, queried lazily against the solver state that built it."""

    def __init__(self, horizon: int, state=None, atoms=None):
        self.horizon = horizon
        self._state = state
        self._atoms = frozenset(atoms) if atoms is not None else None

    @property
    def atoms(self) -> frozenset[Atom]:
        if self._atoms is None:
            self._atoms = self._state.materialize(self.horizon)
        return self._atoms

    def contains(self, pred: str, step: int) -> bool:
        if self._state is not None and self._atoms is None:
            if step > self.horizon:
                return False
            return self._state.row_true(pred, step)
        return atom(pred, step) in self.atoms

    def project(self, preds, step: int) -> list[str]:
        """Sorted names of the given predicates that hold at ``step``."""
        return sorted(p for p in preds if self.contains(p, step))

    def __contains__(self, a: Atom) -> bool:
        return a in self.atoms

    def __iter__(self):
        return iter(self.atoms)


def _evaluate_stratified(rules) -> set[Atom] | None:
    """Perfect model of a step-free ground program, or None when a constraint
    fires. Raises UnsupportedProgramError on any cycle through negation."""
    expanded = expand_all(rules)
    derive = [r for r in expanded if r.head is not None]
    checks = [r for r in expanded if r.head is None]

    by_head: dict[Atom, list[GroundRule]] = {}
    vertices: list[Atom] = []
    seen = set()

    def note(a):
        if a not in seen:
            seen.add(a)
            vertices.append(a)

    for r in derive:
        note(r.head)
        by_head.setdefault(r.head, []).append(r)
        for a in r.body_atoms():
            note(a)

    def successors(a):
        for r in by_head.get(a, ()):
            yield from r.body_atoms()

    model: set[Atom] = set()
    for comp in tarjan_scc(vertices, successors):
        comp_set = set(comp)
        comp_rules = [r for a in comp for r in by_head.get(a, ())]
        for r in comp_rules:
            for n in r.neg:
                if n in comp_set:
                    raise UnsupportedProgramError(
                        f"negation inside a dependency cycle at {n} "
                        "(program is not locally stratified)"
                    )
        changed = True
        while changed:
            changed = False
            for r in comp_rules:
                if r.head in model:
                    continue
                if all(p in model for p in r.pos) and not any(n in model for n in r.neg):
                    model.add(r.head)
                    changed = True

    for c in checks:
        if all(p in model for p in c.pos) and not any(n in model for n in c.neg):
            return None
    return model


class _SchemaCode:
    """Flat-array encoding of a step schema against one state's row layout."""

    __slots__ = (
        "heads", "min_steps", "lit_start", "lit_rows", "lit_offs", "lit_signs",
        "card_rows", "card_los", "card_his",
    )

    def __init__(self, state, schema):
        rules = schema.eval_order_rules()
        n = len(rules)
        heads = np.empty(n, dtype=np.int32)
        min_steps = np.empty(n, dtype=np.int32)
        lit_start = np.zeros(n + 1, dtype=np.int32)
        lit_rows, lit_offs, lit_signs = [], [], []
        card_rows = np.full(n, -1, dtype=np.int32)
        card_los = np.zeros(n, dtype=np.int32)
        card_his = np.zeros(n, dtype=np.int32)
        for i, tr in enumerate(rules):
            heads[i] = state.row_for(tr.head)
            min_steps[i] = tr.min_step
            for lit in tr.lits:
                lit_rows.append(state.row_for(lit.pred))
                lit_offs.append(lit.off)
                lit_signs.append(1 if lit.positive else 0)
            lit_start[i + 1] = len(lit_rows)
            if tr.card is not None:
                card_rows[i] = state.register_counted(tr.card.pred)
                card_los[i] = tr.card.lo_off
                card_his[i] = tr.card.hi_off
        self.heads = heads
        self.min_steps = min_steps
        self.lit_start = lit_start
        self.lit_rows = np.array(lit_rows, dtype=np.int32)
        self.lit_offs = np.array(lit_offs, dtype=np.int32)
        self.lit_signs = np.array(lit_signs, dtype=np.int8)
        self.card_rows = card_rows
        self.card_los = card_los
        self.card_his = card_his


class SolverState:
    """Derived-truth cache attached to an IncrementalProgram.

    Step-unary atoms (``pred(t)``, t >= 1) live in a predicate-by-step truth
    matrix; every other true atom (base facts, manifestation facts) lives in
    a plain set. Prefix-count rows back interval cardinality checks.
    """

    def __init__(self, program: IncrementalProgram, presize_steps: int = 0):
        self.program = program
        cols = max(64, presize_steps + 2)
        self.pred_rows: dict[str, int] = {}
        self.row_preds: list[str] = []
        self.truth = np.zeros((16, cols), dtype=np.uint8)
        self.cnt = np.zeros((0, cols), dtype=np.int32)
        self.cnt_of_row = np.full(16, -1, dtype=np.int32)
        self.counted_rows: list[int] = []
        self.facts: set[Atom] = set()
        self.constraints: list[GroundRule] = []
        self.base_done = False
        self.base_unsat = False
        self.last_step = 0
        self.processed = 0
        self._schema_codes: dict[object, _SchemaCode] = {}

    # -- layout ----------------------------------------------------------

    def row_for(self, pred: str) -> int:
        row = self.pred_rows.get(pred)
        if row is None:
            row = len(self.row_preds)
            if row >= self.truth.shape[0]:
                grown = np.zeros((self.truth.shape[0] * 2, self.truth.shape[1]), dtype=np.uint8)
                grown[: self.truth.shape[0]] = self.truth
                self.truth = grown
                comap = np.full(grown.shape[0], -1, dtype=np.int32)
                comap[: self.cnt_of_row.shape[0]] = self.cnt_of_row
                self.cnt_of_row = comap
            self.pred_rows[pred] = row
            self.row_preds.append(pred)
        return row

    def ensure_cols(self, t: int) -> None:
        need = t + 1
        if need <= self.truth.shape[1]:
            return
        cols = max(need, self.truth.shape[1] * 2)
        grown = np.zeros((self.truth.shape[0], cols), dtype=np.uint8)
        grown[:, : self.truth.shape[1]] = self.truth
        self.truth = grown
        gcnt = np.zeros((self.cnt.shape[0], cols), dtype=np.int32)
        gcnt[:, : self.cnt.shape[1]] = self.cnt
        self.cnt = gcnt

    def register_counted(self, pred: str) -> int:
        """Ensure a prefix-count row for pred; backfill through last_step."""
        row = self.row_for(pred)
        c = self.cnt_of_row[row]
        if c >= 0:
            return int(c)
        c = self.cnt.shape[0]
        gcnt = np.zeros((c + 1, self.truth.shape[1]), dtype=np.int32)
        if c:
            gcnt[:c] = self.cnt
        self.cnt = gcnt
        upto = self.last_step + 1
        self.cnt[c, :upto] = np.cumsum(self.truth[row, :upto], dtype=np.int32)
        self.cnt_of_row[row] = c
        self.counted_rows.append(row)
        return c

    # -- truth -----------------------------------------------------------

    def begin_step(self, t: int) -> None:
        self.ensure_cols(t)
        if self.cnt.shape[0] and t > self.last_step:
            # roll prefix counts across any step gap
            self.cnt[:, self.last_step + 1 : t + 1] = self.cnt[:, self.last_step : self.last_step + 1]

    def mark_true(self, row: int, t: int) -> None:
        if self.truth[row, t] == 0:
            self.truth[row, t] = 1
            c = self.cnt_of_row[row]
            if c >= 0:
                self.cnt[c, t] += 1

    def row_true(self, pred: str, step: int) -> bool:
        row = self.pred_rows.get(pred)
        if row is None or step < 1 or step >= self.truth.shape[1]:
            return False
        return bool(self.truth[row, step])

    def atom_true(self, a: Atom) -> bool:
        if a.is_step_unary() and a.args[0] >= 1:
            return self.row_true(a.pred, a.args[0])
        return a in self.facts

    def assert_atom(self, a: Atom) -> None:
        if a.is_step_unary() and a.args[0] >= 1:
            self.ensure_cols(a.args[0])
            self.mark_true(self.row_for(a.pred), a.args[0])
        else:
            self.facts.add(a)

    def card_true(self, card) -> bool:
        lo, hi = max(1, card.lo), card.hi
        if hi < lo:
            return False
        row = self.pred_rows.get(card.pred)
        if row is None:
            return False
        hi = min(hi, self.truth.shape[1] - 1)
        if hi < lo:
            return False
        return bool(self.truth[row, lo : hi + 1].any())

    # -- evaluation ------------------------------------------------------

    def eval_base(self) -> None:
        model = _evaluate_stratified(self.program.base)
        if model is None:
            self.base_unsat = True
        else:
            for a in model:
                self.assert_atom(a)
        self.base_done = True

    def eval_step(self, t: int, rules) -> None:
        self.begin_step(t)
        head_preds: set[str] = set()
        derive_rules = []
        for r in rules:
            if r.head is None:
                self.constraints.append(r)
                continue
            h = r.head
            if h.step != t:
                raise UnsupportedProgramError(
                    f"rule head {h} in the batch for step {t} does not carry step {t}"
                )
            if h.is_step_unary():
                head_preds.add(h.pred)
            if r.is_fact:
                self.assert_atom(h)
            else:
                if not h.is_step_unary():
                    raise UnsupportedProgramError(
                        f"derived head {h} must be a unary step atom"
                    )
                derive_rules.append(r)

        # same-step predicate dependency graph
        edges: dict[str, set[str]] = {p: set() for p in head_preds}
        neg_edges: set[tuple[str, str]] = set()
        for r in derive_rules:
            hp = r.head.pred
            for a in r.pos:
                self._classify_body(a, t, hp, head_preds, edges)
            for a in r.neg:
                if self._classify_body(a, t, hp, head_preds, edges):
                    neg_edges.add((hp, a.pred))
            if r.card is not None:
                if r.card.hi > t:
                    raise UnsupportedProgramError(
                        f"cardinality interval reaching step {r.card.hi} beyond batch step {t}"
                    )
                if r.card.hi == t and r.card.pred in head_preds:
                    edges[hp].add(r.card.pred)

        by_pred: dict[str, list[GroundRule]] = {}
        for r in derive_rules:
            by_pred.setdefault(r.head.pred, []).append(r)

        for comp in tarjan_scc(sorted(edges), lambda p: edges.get(p, ())):
            comp_set = set(comp)
            for hp, np_ in neg_edges:
                if hp in comp_set and np_ in comp_set:
                    raise UnsupportedProgramError(
                        f"negation between {hp} and {np_} inside step {t}"
                        " (batch is not stratified)"
                    )
            comp_rules = [r for p in comp for r in by_pred.get(p, ())]
            changed = True
            while changed:
                changed = False
                for r in comp_rules:
                    row = self.row_for(r.head.pred)
                    if self.truth[row, t]:
                        continue
                    if self._fires(r):
                        self.mark_true(row, t)
                        changed = True
        self.last_step = t

    def _classify_body(self, a, t, head_pred, head_preds, edges) -> bool:
        """Record a same-step dependency edge; True when the atom is same-step."""
        s = a.step
        if s is not None and s > t:
            raise UnsupportedProgramError(
                f"body atom {a} references step {s} beyond batch step {t}"
            )
        if a.is_step_unary() and s == t and a.pred in head_preds:
            edges[head_pred].add(a.pred)
            return True
        return False

    def _fires(self, r: GroundRule) -> bool:
        for a in r.pos:
            if not self.atom_true(a):
                return False
        for a in r.neg:
            if self.atom_true(a):
                return False
        if r.card is not None and not self.card_true(r.card):
            return False
        return True

    def eval_span(self, schema, t_from: int, t_to: int, use_numba=None, first_rolled=False) -> None:
        self.ensure_cols(t_to)
        if self.cnt.shape[0] and t_from - 1 > self.last_step:
            self.cnt[:, self.last_step + 1 : t_from] = self.cnt[:, self.last_step : self.last_step + 1]
        code = self._schema_codes.get(schema)
        if code is None:
            code = _SchemaCode(self, schema)
            self._schema_codes[schema] = code
        evaluator = get_span_evaluator(use_numba)
        evaluator(
            self.truth, self.cnt, self.cnt_of_row,
            code.heads, code.min_steps, code.lit_start,
            code.lit_rows, code.lit_offs, code.lit_signs,
            code.card_rows, code.card_los, code.card_his,
            t_from, t_to, 1 if first_rolled else 0,
        )
        self.last_step = t_to

    def eval_horizon(self, entry: _HorizonEntry, use_numba=None) -> None:
        """Seed the step's facts and lift rules, then kernel-evaluate the
        schema part. Equivalent to eval_step on compile_step's batch."""
        from .compiler import MANIFEST

        t = entry.step
        self.begin_step(t)
        sr = entry.step_rules
        for f in sr.facts:
            self.assert_atom(f.head)
        for r in sr.rules:
            if not (r.pos and r.pos[0].pred == MANIFEST):
                break  # lift rules come first; the rest is the schema part
            if self._fires(r):
                self.mark_true(self.row_for(r.head.pred), t)
        self.eval_span(entry.schema, t, t, use_numba=use_numba, first_rolled=True)

    def violated(self, c: GroundRule) -> bool:
        return (
            all(self.atom_true(a) for a in c.pos)
            and not any(self.atom_true(a) for a in c.neg)
            and (c.card is None or self.card_true(c.card))
        )

    def materialize(self, horizon: int) -> frozenset[Atom]:
        out = set()
        for a in self.facts:
            s = a.step
            if s is None or s <= horizon:
                out.add(a)
        hi = min(horizon, self.truth.shape[1] - 1)
        for row, pred in enumerate(self.row_preds):
            for s in np.nonzero(self.truth[row, 1 : hi + 1])[0]:
                out.add(atom(pred, int(s) + 1))
        return frozenset(out)


def ensure_state(program: IncrementalProgram, presize_steps: int = 0) -> SolverState:
    if program.state is None:
        program.state = SolverState(program, presize_steps=presize_steps)
    return program.state


def solve(program: IncrementalProgram, use_numba: bool | None = None) -> AnswerSet | None:
    """Stable model of base + cumulative(<=t) + volatile(t), or None if UNSAT.

    Work per call is bounded by the entries added since the previous call;
    already-evaluated steps are reused. Raises UnsupportedProgramError for
    programs outside the locally stratified class this solver covers.
    """
    if not program.entries:
        rules = list(program.base)
        if program.volatile is not None:
            rules.append(program.volatile[1])
        model = _evaluate_stratified(rules)
        if model is None:
            return None
        horizon = program.volatile[0] if program.volatile else 0
        return AnswerSet(horizon, atoms=model)

    state = ensure_state(program)
    if not state.base_done:
        state.eval_base()
    if state.base_unsat:
        return None

    for entry in program.entries[state.processed :]:
        if isinstance(entry, _StepEntry):
            state.eval_step(entry.step, entry.rules)
        elif isinstance(entry, _HorizonEntry):
            state.eval_horizon(entry, use_numba=use_numba)
        else:
            state.eval_span(entry.schema, entry.first, entry.last, use_numba=use_numba)
    state.processed = len(program.entries)

    for c in state.constraints:
        if state.violated(c):
            return None
    horizon = state.last_step
    if program.volatile is not None:
        horizon = max(horizon, program.volatile[0])
        state.ensure_cols(horizon)
        if state.violated(program.volatile[1]):
            return None
    return AnswerSet(horizon, state=state)
