"""Vivace: a collaborative live-coding language and engine.

Programs are lines of ``voice.param = [values...]`` assignments with
postfix sequence operators. This package parses them, evaluates them
into voice state, schedules the state as cyclic timed events, renders
those offline to PCM audio and automation traces, and hosts shared
editing sessions over WebSockets so several performers can edit and
evaluate one program live.
"""

from .errors import DivisionByZero, EvalError, UnboundVariable, VivaceError
from .interp import (
    EngineState,
    EvalResult,
    SourceDescriptor,
    VoiceState,
    dump_json,
    dump_state,
    eval_program,
    note_to_freq,
    resolve_expr,
    validate_param,
)
from .parser import (
    LexError,
    ParseError,
    ParseResult,
    Program,
    Statement,
    diagnostics_json,
    format_diagnostics,
    format_program,
    parse,
    parse_program,
    tokenize,
)
from .scheduler import (
    ScheduledEvent,
    ScheduleError,
    Timeline,
    diff_schedule,
    schedule,
    timeline_to_csv,
    timeline_to_jsonl,
)
from .seqcore import (
    SeqOperator,
    apply_operator,
    apply_operator_chain,
    eval_comprehension,
)
from .session import (
    ClientReplica,
    DocOp,
    SessionState,
    SpanMismatch,
    StaleVersion,
    apply_op,
    server_apply,
    transform,
)

__version__ = "0.1.0"

__all__ = [
    "ClientReplica",
    "DivisionByZero",
    "DocOp",
    "EngineState",
    "EvalError",
    "EvalResult",
    "LexError",
    "ParseError",
    "ParseResult",
    "Program",
    "ScheduleError",
    "ScheduledEvent",
    "SeqOperator",
    "SessionState",
    "SourceDescriptor",
    "SpanMismatch",
    "StaleVersion",
    "Statement",
    "Timeline",
    "UnboundVariable",
    "VivaceError",
    "VoiceState",
    "apply_op",
    "apply_operator",
    "apply_operator_chain",
    "diagnostics_json",
    "diff_schedule",
    "dump_json",
    "dump_state",
    "eval_comprehension",
    "eval_program",
    "format_diagnostics",
    "format_program",
    "note_to_freq",
    "parse",
    "parse_program",
    "resolve_expr",
    "schedule",
    "server_apply",
    "timeline_to_csv",
    "timeline_to_jsonl",
    "tokenize",
    "transform",
    "validate_param",
]
