"""Audio chain model, offline renderer, spectrum analysis and WAV I/O."""

from .analyze import BufferTooShort, SpectrumFrame, analyze, frames_to_jsonl
from .chain import CHAIN_ORDER, ChainNode, build_chain
from .render import (
    AutomationPoint,
    RenderResult,
    automation_to_jsonl,
    render,
)
from .wav import (
    AudioBuffer,
    MissingSampleFile,
    SampleRateMismatch,
    UnsupportedInputFormat,
    read_wav,
    write_wav,
)

__all__ = [
    "AudioBuffer",
    "AutomationPoint",
    "BufferTooShort",
    "CHAIN_ORDER",
    "ChainNode",
    "MissingSampleFile",
    "RenderResult",
    "SampleRateMismatch",
    "SpectrumFrame",
    "UnsupportedInputFormat",
    "analyze",
    "automation_to_jsonl",
    "build_chain",
    "frames_to_jsonl",
    "read_wav",
    "render",
    "write_wav",
]
