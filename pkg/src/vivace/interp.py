"""Evaluate parsed programs into engine state.

State updates are incremental: re-evaluating a buffer replaces only the
voices and parameters it names, so untouched voices keep playing across
live edits. Evaluation never raises for per-statement problems; errors
and warnings are collected and returned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping
from urllib.parse import urlparse

from .errors import EvalError
from .parser import Comprehension, Program, SeqLiteral, SourceCall
from .seqcore import apply_operator_chain, eval_arith, eval_comprehension

WAVEFORMS = ("sine", "square", "saw", "triangle")

DEFAULT_TEMPO_BPM = 120.0

# parameters with defined meanings; everything else is generic automation
KNOWN_PARAMS = frozenset(
    {"src", "pos", "cdur", "note", "amp", "gain", "pan",
     "eq.low", "eq.mid", "eq.high", "reverb.time"}
)

_CLAMP_RANGES = {
    "amp": (0.0, 1.0),
    "gain": (0.0, 1.0),
    "pan": (-1.0, 1.0),
    "note": (0.0, 127.0),
    "pos": (0.0, None),
}


@dataclass(frozen=True)
class SourceDescriptor:
    kind: str  # youtube | sample | osc
    ref: str


@dataclass(frozen=True)
class VoiceState:
    name: str
    source: SourceDescriptor | None = None
    params: Mapping = field(default_factory=dict)  # name -> tuple[float, ...]
    generation: int = 0


@dataclass(frozen=True)
class EngineState:
    voices: Mapping = field(default_factory=dict)  # name -> VoiceState
    tempo_bpm: float = DEFAULT_TEMPO_BPM


@dataclass(frozen=True)
class EvalWarning:
    voice: str
    param: str
    message: str


@dataclass(frozen=True)
class EvalResult:
    state: EngineState
    warnings: tuple = ()
    errors: tuple = ()  # tuple[EvalError, ...]

    @property
    def ok(self):
        return not self.errors


def note_to_freq(note: float) -> float:
    """Equal-tempered frequency of a MIDI note number (69 -> 440 Hz)."""
    return 440.0 * 2.0 ** ((note - 69.0) / 12.0)


def validate_source(func: str, arg: str) -> SourceDescriptor:
    if func == "osc":
        if arg not in WAVEFORMS:
            raise EvalError(
                f"unknown waveform '{arg}' (expected one of {', '.join(WAVEFORMS)})"
            )
    elif func == "sample":
        if not arg:
            raise EvalError("sample path must not be empty")
    elif func == "youtube":
        url = urlparse(arg)
        if url.scheme not in ("http", "https") or not url.netloc:
            raise EvalError(f"'{arg}' is not a valid http(s) URL")
    else:
        raise EvalError(f"unknown source function '{func}'")
    return SourceDescriptor(func, arg)


def validate_param(name: str, seq) -> tuple[tuple, EvalWarning | None]:
    """Range-check a parameter sequence, clamping out-of-range values.

    cdur is the exception: non-positive durations cannot be scheduled at
    all, so they are an error rather than a clamp. Unknown parameter
    names pass through untouched.
    """
    seq = tuple(float(x) for x in seq)
    if name == "cdur":
        if any(x <= 0.0 for x in seq):
            raise EvalError("cdur requires positive durations")
        return seq, None
    bounds = _CLAMP_RANGES.get(name)
    if bounds is None:
        return seq, None
    lo, hi = bounds
    clamped = tuple(_clamp(x, lo, hi) for x in seq)
    if clamped != seq:
        if hi is None:
            message = f"{name} clamped to nonnegative"
        else:
            message = f"{name} clamped to [{_fmt(lo)},{_fmt(hi)}]"
        return clamped, EvalWarning("", name, message)
    return clamped, None


def _clamp(x, lo, hi):
    if lo is not None and x < lo:
        return lo
    if hi is not None and x > hi:
        return hi
    return x


def _fmt(x):
    return str(int(x)) if float(x).is_integer() else repr(x)


def resolve_expr(rhs):
    """Turn a parsed sequence expression into its value sequence.

    This is the language-level result, before any per-parameter range
    policy is applied by eval_program.
    """
    if isinstance(rhs, SeqLiteral):
        seq = tuple(eval_arith(e) for e in rhs.elements)
        return apply_operator_chain(seq, rhs.ops)
    if isinstance(rhs, Comprehension):
        domain = tuple(eval_arith(e) for e in rhs.domain)
        seq = eval_comprehension(rhs.body, rhs.var, domain)
        return apply_operator_chain(seq, rhs.ops)
    raise TypeError(f"not a sequence expression: {rhs!r}")


def eval_program(state: EngineState, program: Program) -> EvalResult:
    """Apply a program's statements in order to a state snapshot.

    Returns a new state; the input is never mutated. A failing statement
    is skipped (and reported), the rest still apply.
    """
    voices = dict(state.voices)
    warnings = []
    errors = []
    for stmt in program.statements:
        try:
            voice = voices.get(stmt.voice) or VoiceState(stmt.voice)
            if isinstance(stmt.rhs, SourceCall):
                if stmt.param != "src":
                    raise EvalError(
                        f"source call is only valid for parameter 'src', not '{stmt.param}'"
                    )
                source = validate_source(stmt.rhs.func, stmt.rhs.arg)
                voice = replace(voice, source=source, generation=voice.generation + 1)
            elif stmt.param == "src":
                raise EvalError("parameter 'src' requires a source call")
            else:
                seq, warning = validate_param(stmt.param, resolve_expr(stmt.rhs))
                if warning is not None:
                    warnings.append(replace(warning, voice=stmt.voice))
                params = dict(voice.params)
                params[stmt.param] = seq
                voice = replace(voice, params=params, generation=voice.generation + 1)
            voices[stmt.voice] = voice
        except EvalError as err:
            errors.append(err.at(stmt.span))
    return EvalResult(
        EngineState(voices, state.tempo_bpm), tuple(warnings), tuple(errors)
    )


def dump_state(state: EngineState) -> dict:
    """JSON-ready snapshot with deterministic (sorted) structure."""
    voices = {}
    for name in sorted(state.voices):
        voice = state.voices[name]
        source = None
        if voice.source is not None:
            source = {"kind": voice.source.kind, "ref": voice.source.ref}
        voices[name] = {
            "source": source,
            "params": {p: list(voice.params[p]) for p in sorted(voice.params)},
        }
    return {"tempo_bpm": state.tempo_bpm, "voices": voices}


def dump_json(state: EngineState, indent=None) -> str:
    return json.dumps(dump_state(state), sort_keys=True, indent=indent)
