"""Offline rendering of a timeline to stereo PCM plus automation traces.

Oscillator voices synthesize their waveform per event; sample voices
play file material from the event's pos offset. Each event is shaped by
a short linear attack/release so step boundaries never click. Panning
follows the equal-power law; voices are summed in name order and the
master hard-clips to [-1, 1].

eq3 and reverb settings are not audible here: they are emitted as
time-stamped automation points, as is every generic parameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import VivaceError
from .wav import AudioBuffer, SampleRateMismatch, read_wav

DEFAULT_SAMPLE_RATE = 44100
EDGE_RAMP_SECONDS = 0.005
DEFAULT_FREQ = 440.0  # note 69

# parameters consumed by synthesis; everything else goes to the trace
AUDIBLE_PARAMS = frozenset({"pos", "freq", "amp", "gain", "pan"})


class RenderError(VivaceError):
    pass


@dataclass(frozen=True)
class AutomationPoint:
    time: float
    voice: str
    param: str
    value: float


@dataclass
class RenderResult:
    buffer: AudioBuffer
    automation: list  # list[AutomationPoint]
    warnings: list    # list[str]


def _waveform(kind: str, freq: float, n: int, sample_rate: int) -> np.ndarray:
    phase = (freq * np.arange(n) / sample_rate) % 1.0
    if kind == "sine":
        return np.sin(2.0 * np.pi * phase)
    if kind == "square":
        return np.where(phase < 0.5, 1.0, -1.0)
    if kind == "saw":
        return 2.0 * phase - 1.0
    if kind == "triangle":
        return 1.0 - 4.0 * np.abs(phase - 0.5)
    raise RenderError(f"unknown waveform '{kind}'")


def _envelope(n: int, sample_rate: int) -> np.ndarray:
    env = np.ones(n)
    ramp = min(int(round(EDGE_RAMP_SECONDS * sample_rate)), n // 2)
    if ramp > 0:
        slope = np.arange(1, ramp + 1) / ramp
        env[:ramp] = slope
        env[n - ramp:] = slope[::-1]
    return env


class _SampleCache:
    def __init__(self, sample_rate):
        self.sample_rate = sample_rate
        self._cache = {}

    def mono(self, path) -> np.ndarray:
        if path not in self._cache:
            buf = read_wav(path)
            if buf.sample_rate != self.sample_rate:
                raise SampleRateMismatch(
                    f"{path}: file is {buf.sample_rate} Hz, render is "
                    f"{self.sample_rate} Hz (resampling is not supported)"
                )
            self._cache[path] = buf.mono()
        return self._cache[path]


def _event_signal(event, source, samples, n, sample_rate):
    if source.kind == "osc":
        freq = float(event.values.get("freq", DEFAULT_FREQ))
        return _waveform(source.ref, freq, n, sample_rate)
    # sample source: play from pos seconds, zero-padded past the end
    data = samples.mono(source.ref)
    offset = int(round(float(event.values.get("pos", 0.0)) * sample_rate))
    sig = np.zeros(n)
    if offset < len(data):
        take = min(n, len(data) - offset)
        sig[:take] = data[offset : offset + take]
    return sig


def render(timeline, state, sample_rate: int = DEFAULT_SAMPLE_RATE) -> RenderResult:
    """Render a timeline against the state it was scheduled from.

    The buffer spans exactly ceil(horizon * sample_rate) frames; events
    are truncated at the horizon. Output is bit-deterministic for a
    given timeline and set of source files.
    """
    frames = math.ceil(timeline.horizon * sample_rate)
    mix = np.zeros((frames, 2))
    automation = []
    warnings = []
    samples = _SampleCache(sample_rate)

    by_voice = {}
    for event in timeline.events:
        by_voice.setdefault(event.voice, []).append(event)
        for param in sorted(event.values):
            if param not in AUDIBLE_PARAMS:
                automation.append(
                    AutomationPoint(event.start, event.voice, param, event.values[param])
                )
    automation.sort(key=lambda p: (p.time, p.voice, p.param))

    # fixed mix order (voice name ascending) keeps output bit-stable even
    # if per-voice rendering is ever parallelized
    for name in sorted(by_voice):
        voice = state.voices.get(name)
        source = voice.source if voice is not None else None
        if source is None or source.kind == "youtube":
            reason = "no source" if source is None else "youtube source"
            warnings.append(f"voice '{name}' has {reason}; rendered silent")
            continue
        mix += _render_voice(by_voice[name], source, samples, frames, sample_rate)

    np.clip(mix, -1.0, 1.0, out=mix)
    return RenderResult(AudioBuffer(sample_rate, mix), automation, warnings)


def _render_voice(events, source, samples, frames, sample_rate):
    buf = np.zeros((frames, 2))
    for event in events:
        i0 = int(round(event.start * sample_rate))
        i1 = min(int(round((event.start + event.duration) * sample_rate)), frames)
        n = i1 - i0
        if n <= 0:
            continue
        sig = _event_signal(event, source, samples, n, sample_rate)
        level = float(event.values.get("amp", 1.0)) * float(event.values.get("gain", 1.0))
        sig = sig * (level * _envelope(n, sample_rate))
        pan = float(event.values.get("pan", 0.0))
        theta = (pan + 1.0) * np.pi / 4.0
        buf[i0:i1, 0] += sig * np.cos(theta)
        buf[i0:i1, 1] += sig * np.sin(theta)
    return buf


def automation_to_jsonl(automation) -> str:
    """One trace point per line: {"t":…, "voice":…, "param":…, "value":…}."""
    lines = []
    for point in automation:
        lines.append(
            json.dumps(
                {"t": point.time, "voice": point.voice,
                 "param": point.param, "value": point.value}
            )
        )
    return "".join(line + "\n" for line in lines)
