"""Turn engine state into a deterministic stream of timed per-voice events.

Every sequence parameter cycles independently at the voice's step rate:
step k reads element k mod len from each sequence, so unequal lengths
phase against each other (polymeter). Step durations come from cdur,
expressed as fractions of a whole note (240/bpm seconds).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping

from .errors import VivaceError
from .interp import EngineState, note_to_freq

DEFAULT_CDUR = (0.25,)


class ScheduleError(VivaceError):
    pass


@dataclass(frozen=True)
class ScheduledEvent:
    voice: str
    step_index: int
    start: float     # seconds
    duration: float  # seconds
    values: Mapping  # param -> float (note already resolved to freq)


@dataclass(frozen=True)
class Timeline:
    events: tuple  # tuple[ScheduledEvent, ...] sorted by (start, voice)
    horizon: float


def whole_note_seconds(tempo_bpm: float) -> float:
    return 240.0 / tempo_bpm


def _voice_cdur(voice) -> tuple:
    return tuple(voice.params.get("cdur") or DEFAULT_CDUR)


def _step_values(voice, k: int) -> dict:
    values = {}
    for param in sorted(voice.params):
        if param == "cdur":
            continue
        seq = voice.params[param]
        if not seq:
            continue
        x = seq[k % len(seq)]
        if param == "note":
            values["freq"] = note_to_freq(x)
        else:
            values[param] = x
    return values


def schedule(state: EngineState, horizon: float) -> Timeline:
    """All events starting before ``horizon`` seconds, sorted by (start, voice).

    Voices without any sequence parameter produce no events. Per voice,
    events are contiguous: each starts exactly where the previous ended.
    """
    if horizon <= 0:
        raise ScheduleError("horizon must be positive")
    whole = whole_note_seconds(state.tempo_bpm)
    events = []
    for name in sorted(state.voices):
        voice = state.voices[name]
        if not voice.params:
            continue
        cdur = _voice_cdur(voice)
        if not cdur:
            raise ScheduleError(f"voice '{name}' has an empty cdur")
        start = 0.0
        k = 0
        while start < horizon:
            duration = cdur[k % len(cdur)] * whole
            if duration <= 0:
                raise ScheduleError(f"voice '{name}' has a non-positive step duration")
            events.append(ScheduledEvent(name, k, start, duration, _step_values(voice, k)))
            start += duration
            k += 1
    events.sort(key=lambda e: (e.start, e.voice))
    return Timeline(tuple(events), horizon)


@dataclass(frozen=True)
class VoiceSwitch:
    """Where a re-evaluated definition takes over for one voice.

    ``time`` is the first step boundary at or after the switch request;
    ``step_index`` is the step count carried across the boundary, which
    restarts at zero when the cdur length changed.
    """

    voice: str
    time: float
    step_index: int
    reset_steps: bool
    changed: bool


def diff_schedule(old: EngineState, new: EngineState, switch_time: float) -> dict:
    """Per-voice switch rule for applying ``new`` on top of ``old`` mid-performance."""
    if switch_time < 0:
        raise ScheduleError("switch_time must be nonnegative")
    whole = whole_note_seconds(old.tempo_bpm)
    rules = {}
    for name in sorted(new.voices):
        new_voice = new.voices[name]
        old_voice = old.voices.get(name)
        if old_voice is None or not old_voice.params:
            rules[name] = VoiceSwitch(name, switch_time, 0, True, True)
            continue
        old_cdur = _voice_cdur(old_voice)
        boundary = 0.0
        k = 0
        while boundary < switch_time:
            boundary += old_cdur[k % len(old_cdur)] * whole
            k += 1
        reset = len(old_cdur) != len(_voice_cdur(new_voice))
        changed = (
            old_voice.params != new_voice.params
            or old_voice.source != new_voice.source
        )
        rules[name] = VoiceSwitch(name, boundary, 0 if reset else k, reset, changed)
    return rules


# --- serialization ------------------------------------------------------------

def event_to_json(event: ScheduledEvent) -> str:
    values = json.dumps(
        {k: event.values[k] for k in sorted(event.values)}, sort_keys=True
    )
    return (
        f'{{"voice": {json.dumps(event.voice)}, "k": {event.step_index}, '
        f'"start": {event.start:.9f}, "dur": {event.duration:.9f}, '
        f'"values": {values}}}'
    )


def timeline_to_jsonl(timeline: Timeline) -> str:
    """One JSON object per line; start/dur carry nine decimal places."""
    return "".join(event_to_json(e) + "\n" for e in timeline.events)


def timeline_to_csv(timeline: Timeline) -> str:
    """Spreadsheet form: voice,k,start,dur then one column per parameter."""
    params = sorted({p for e in timeline.events for p in e.values})
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["voice", "k", "start", "dur", *params])
    for e in timeline.events:
        row = [e.voice, e.step_index, f"{e.start:.9f}", f"{e.duration:.9f}"]
        row.extend(repr(e.values[p]) if p in e.values else "" for p in params)
        writer.writerow(row)
    return out.getvalue()


def cycle_length(voice) -> int:
    """Steps until a voice's parameter pairing repeats: lcm of sequence lengths."""
    lengths = [len(seq) for seq in voice.params.values() if seq]
    if "cdur" not in voice.params:
        lengths.append(len(DEFAULT_CDUR))
    if not lengths:
        return 1
    return math.lcm(*lengths)
