"""Replay loop: manifestations in, per-horizon annotations and metrics out.

Horizons are solved only at steps where manifestations arrive; the steps in
between are grounded (the progression and inertia chains need every step) via
schema spans but never solved. Incremental mode extends one program; restart
mode rebuilds and re-solves the full program at every horizon and serves as
the monolithic baseline for the benchmark.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Optional

from .compiler import EXPLAINED, StepRules, compile_base, compile_step, compile_volatile, step_schema
from .errors import EngineError, StreamError
from .kb import KnowledgeBase
from .observation import Manifestation, manifestations_by_step
from .program import IncrementalProgram
from .solver import ensure_state, solve


class Mode(enum.Enum):
    INCREMENTAL = "incremental"
    RESTART = "restart"


@dataclass(frozen=True)
class Annotation:
    """Answer-set projection at one solved horizon."""

    step: int
    wall_time: datetime
    answers: tuple[str, ...]

    def to_json_line(self) -> str:
        return json.dumps(
            {"step": self.step, "wallTime": self.wall_time.isoformat(), "answers": list(self.answers)}
        )


@dataclass(frozen=True)
class MetricsRow:
    step: int
    mode: str
    ground_rules: int
    ground_atoms: int
    solve_ms: float
    cumulative_ms: float


METRICS_HEADER = "step,mode,groundRules,groundAtoms,solveMs,cumulativeMs"


def format_metrics_row(row: MetricsRow) -> str:
    return (
        f"{row.step},{row.mode},{row.ground_rules},{row.ground_atoms},"
        f"{row.solve_ms:.3f},{row.cumulative_ms:.3f}"
    )


class Engine:
    """One replay of one scenario; single logical thread of control."""

    def __init__(
        self,
        kb: KnowledgeBase,
        granularity: int = 1,
        mode: Mode = Mode.INCREMENTAL,
        origin: Optional[datetime] = None,
        use_numba: Optional[bool] = None,
        final_step_hint: int = 0,
        materialize_spans: bool = False,
    ):
        try:
            self.kb = kb.rescaled(granularity)
        except ValueError as e:
            raise EngineError(str(e)) from None
        self.granularity = granularity
        self.mode = mode
        self.origin = origin
        self.use_numba = use_numba
        self.final_step_hint = final_step_hint
        self.materialize_spans = materialize_spans
        self.schema = step_schema(self.kb)
        self.last_horizon = 0
        self.history: list[tuple[int, StepRules]] = []
        self.cumulative_ms = 0.0
        self.last_solve_ms = 0.0
        self.program = self._fresh_program()

    def _fresh_program(self) -> IncrementalProgram:
        program = IncrementalProgram()
        program.add_base(compile_base(self.kb))
        ensure_state(program, presize_steps=self.final_step_hint)
        return program

    def _extend(self, program: IncrementalProgram, prev: int, t: int, step_rules: StepRules):
        if self.materialize_spans:
            # reference path: every step as an explicit rule batch through the
            # generic per-step evaluator (used to cross-check the kernel route)
            for s in range(prev + 1, t):
                program.add_step(s, compile_step(self.kb, s, (), self.schema).ordered)
            program.add_step(t, step_rules.ordered)
        else:
            program.add_span(self.schema, prev + 1, t - 1)
            program.add_horizon(self.schema, step_rules)
        program.set_volatile(t, compile_volatile(t))

    def step(self, t: int, manifestations: Iterable[Manifestation]) -> Optional[Annotation]:
        """Ground through step t, solve the horizon, return its annotation
        (None when the horizon is unsatisfiable; the run continues)."""
        if t <= self.last_horizon:
            raise EngineError(
                f"horizon {t} is not greater than the last processed step {self.last_horizon}"
            )
        manifestations = tuple(manifestations)
        if self.last_horizon == 0:
            self._check_initial(t, manifestations)

        started = time.perf_counter()
        step_rules = compile_step(self.kb, t, manifestations, self.schema)
        if self.mode is Mode.RESTART:
            self.history.append((t, step_rules))
            program = self._fresh_program()
            prev = 0
            for ht, hr in self.history:
                self._extend(program, prev, ht, hr)
                prev = ht
            self.program = program
        else:
            self._extend(self.program, self.last_horizon, t, step_rules)
        answer = solve(self.program, use_numba=self.use_numba)
        self.last_solve_ms = (time.perf_counter() - started) * 1000.0
        self.cumulative_ms += self.last_solve_ms
        self.last_horizon = t

        if answer is None:
            return None
        answers = answer.project(self.schema.projection_preds, t)
        self._check_invariants(t, answer, answers)
        wall = (self.origin or datetime.min) + timedelta(seconds=t * self.granularity)
        return Annotation(t, wall, tuple(answers))

    def metrics_row(self, t: int) -> MetricsRow:
        return MetricsRow(
            t,
            self.mode.value,
            self.program.ground_rule_count,
            self.program.ground_atom_count,
            self.last_solve_ms,
            self.cumulative_ms,
        )

    def _check_initial(self, t: int, manifestations):
        if t != 1:
            raise EngineError(f"first horizon must be step 1, got {t}")
        have = {(m.object, m.attribute) for m in manifestations}
        missing = [p for p in self.kb.observed_pairs() if p not in have]
        if missing:
            raise EngineError(f"missing initial states at step 1 for {sorted(missing)}")

    def _check_invariants(self, t, answer, answers):
        if not answer.contains(EXPLAINED, t):
            raise EngineError(f"answer set at step {t} lacks {EXPLAINED}({t})")
        air = [a for a in answers if a in (self.schema.air_normal, self.schema.air_abnormal)]
        if len(air) != 1:
            raise EngineError(f"expected exactly one air state at step {t}, got {air}")
        if self.schema.air_normal in answers and len(answers) > 1:
            raise EngineError(f"smell atoms alongside {self.schema.air_normal} at step {t}")


def run(
    kb: KnowledgeBase,
    samples,
    mode: Mode = Mode.INCREMENTAL,
    granularity: int = 1,
    use_numba: Optional[bool] = None,
    materialize_spans: bool = False,
) -> tuple[list[Annotation], list[MetricsRow]]:
    """Replay a sample stream; annotations for every satisfiable horizon plus
    one metrics row per solved horizon.

    ``samples`` is a list of (row_number, SensorSample) as produced by
    observation.read_samples, sorted by timestamp.
    """
    if not samples:
        raise StreamError("sample stream has no rows")
    groups = manifestations_by_step(samples, kb, granularity)
    if not groups:
        raise StreamError("stream produced no manifestations")
    origin = samples[0][1].timestamp
    engine = Engine(
        kb,
        granularity=granularity,
        mode=mode,
        origin=origin,
        use_numba=use_numba,
        final_step_hint=groups[-1][0],
        materialize_spans=materialize_spans,
    )
    annotations: list[Annotation] = []
    metrics: list[MetricsRow] = []
    for t, manifests in groups:
        annotation = engine.step(t, manifests)
        if annotation is not None:
            annotations.append(annotation)
        metrics.append(engine.metrics_row(t))
    return annotations, metrics
