"""16-bit PCM WAV input and output.

Buffers hold float64 samples nominally in [-1, 1], shaped
(frames, channels). Reading never resamples: rate mismatches surface as
errors at render time instead of silently detuning material.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

from ..errors import VivaceError


class UnsupportedInputFormat(VivaceError):
    pass


class SampleRateMismatch(VivaceError):
    pass


class MissingSampleFile(VivaceError):
    def __init__(self, path):
        super().__init__(f"sample file not found: {path}")
        self.path = path


@dataclass
class AudioBuffer:
    sample_rate: int
    samples: np.ndarray  # float64, shape (frames, channels)

    @property
    def frames(self) -> int:
        return self.samples.shape[0]

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.frames / self.sample_rate

    def mono(self) -> np.ndarray:
        return self.samples.mean(axis=1)


def write_wav(buffer: AudioBuffer, path) -> None:
    data = np.clip(buffer.samples, -1.0, 1.0)
    ints = np.round(data * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(buffer.channels)
        wav.setsampwidth(2)
        wav.setframerate(buffer.sample_rate)
        wav.writeframes(ints.tobytes())


def read_wav(path) -> AudioBuffer:
    try:
        wav = wave.open(str(path), "rb")
    except FileNotFoundError:
        raise MissingSampleFile(path) from None
    except (wave.Error, EOFError) as err:
        raise UnsupportedInputFormat(f"{path}: {err}") from None
    with wav:
        if wav.getcomptype() != "NONE":
            raise UnsupportedInputFormat(f"{path}: compressed WAV is not supported")
        if wav.getsampwidth() != 2:
            raise UnsupportedInputFormat(
                f"{path}: only 16-bit PCM is supported, got {8 * wav.getsampwidth()}-bit"
            )
        channels = wav.getnchannels()
        if channels not in (1, 2):
            raise UnsupportedInputFormat(f"{path}: {channels} channels not supported")
        raw = wav.readframes(wav.getnframes())
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32767.0
        return AudioBuffer(wav.getframerate(), samples.reshape(-1, channels))
