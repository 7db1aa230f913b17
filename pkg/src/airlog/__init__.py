"""airlog: incremental answer-set stream reasoning for smart-home sensor data.

A declarative knowledge base (objects, attributes, states, sensors, implicit
events) compiles into a three-part ground logic program; sensor streams turn
into manifestations via change detection; a stratum-wise incremental solver
explains every change in the target gas sensor with an answer set per
timestep.
"""

from .atoms import Atom, atom
from .compiler import (
    StepRules,
    StepSchema,
    compile_base,
    compile_step,
    compile_volatile,
    predicate_name,
    step_schema,
)
from .engine import Annotation, Engine, MetricsRow, Mode, run
from .errors import (
    AirlogError,
    AtomBudgetError,
    EngineError,
    KbDocumentError,
    KbValidationError,
    StepOrderError,
    StreamError,
    UnclassifiableValueError,
    UnsupportedProgramError,
)
from .kb import (
    KnowledgeBase,
    Violation,
    load_kb,
    parse_kb,
    serialize,
    validate,
)
from .lptext import format_program, format_rule, parse_program, parse_rule
from .observation import (
    Manifestation,
    SensorSample,
    StateTracker,
    classify,
    detect,
    read_samples,
    to_timestep,
)
from .program import Card, GroundRule, IncrementalProgram
from .semantics import (
    enumerate_stable,
    expand_cardinality,
    gl_reduct,
    is_stable,
    least_model,
    well_founded,
)
from .solver import AnswerSet, solve

__version__ = "0.1.0"

__all__ = [
    "Annotation", "AnswerSet", "Atom", "AirlogError", "AtomBudgetError", "Card",
    "Engine", "EngineError", "GroundRule", "IncrementalProgram", "KbDocumentError",
    "KbValidationError", "KnowledgeBase", "Manifestation", "MetricsRow", "Mode",
    "SensorSample", "StateTracker", "StepOrderError", "StepRules", "StepSchema",
    "StreamError", "UnclassifiableValueError", "UnsupportedProgramError", "Violation",
    "atom", "classify", "compile_base", "compile_step", "compile_volatile", "detect",
    "enumerate_stable", "expand_cardinality", "format_program", "format_rule",
    "gl_reduct", "is_stable", "least_model", "load_kb", "parse_kb", "parse_program",
    "parse_rule", "predicate_name", "read_samples", "run", "serialize", "solve",
    "step_schema", "to_timestep", "validate", "well_founded",
]
