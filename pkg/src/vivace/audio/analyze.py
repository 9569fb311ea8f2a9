"""Short-time spectrum analysis of rendered buffers.

Hann-windowed magnitude spectra over the mono mixdown, matching what the
in-chain analyzer exposes for driving visuals: per-bin energies over
successive hops.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import VivaceError

DEFAULT_FFT_SIZE = 1024
DEFAULT_HOP = 512


class BufferTooShort(VivaceError):
    pass


@dataclass(frozen=True)
class SpectrumFrame:
    time: float  # seconds, start of window
    magnitudes: np.ndarray  # length fft_size // 2


def hann_window(n: int) -> np.ndarray:
    # periodic form, the STFT convention
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


def analyze(buffer, fft_size: int = DEFAULT_FFT_SIZE, hop: int = DEFAULT_HOP):
    """Magnitude spectra of successive windows; returns list[SpectrumFrame]."""
    if fft_size < 2 or fft_size & (fft_size - 1):
        raise ValueError(f"fft_size must be a power of two, got {fft_size}")
    if hop <= 0:
        raise ValueError(f"hop must be positive, got {hop}")
    mono = buffer.mono()
    if len(mono) < fft_size:
        raise BufferTooShort(
            f"buffer has {len(mono)} frames, need at least {fft_size}"
        )
    window = hann_window(fft_size)
    frames = []
    for offset in range(0, len(mono) - fft_size + 1, hop):
        spectrum = np.fft.rfft(mono[offset : offset + fft_size] * window)
        magnitudes = np.abs(spectrum[: fft_size // 2])
        frames.append(SpectrumFrame(offset / buffer.sample_rate, magnitudes))
    return frames


def frames_to_jsonl(frames) -> str:
    lines = []
    for frame in frames:
        lines.append(
            json.dumps({"time": frame.time, "magnitudes": frame.magnitudes.tolist()})
        )
    return "".join(line + "\n" for line in lines)
