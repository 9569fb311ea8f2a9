import math
import wave

import numpy as np
import pytest

from vivace.audio import (
    AudioBuffer,
    BufferTooShort,
    CHAIN_ORDER,
    MissingSampleFile,
    SampleRateMismatch,
    UnsupportedInputFormat,
    analyze,
    build_chain,
    read_wav,
    render,
    write_wav,
)
from vivace.interp import EngineState, eval_program
from vivace.parser import parse_program
from vivace.scheduler import schedule

SR = 44100


def state_of(source):
    return eval_program(EngineState(), parse_program(source)).state


def render_source(source, seconds, sample_rate=SR):
    state = state_of(source)
    return render(schedule(state, seconds), state, sample_rate)


class TestWav:
    def test_round_trip_within_one_lsb(self, tmp_path):
        rng = np.random.default_rng(7)
        samples = rng.uniform(-1, 1, size=(2000, 2))
        path = tmp_path / "rt.wav"
        write_wav(AudioBuffer(SR, samples), path)
        back = read_wav(path)
        assert back.sample_rate == SR
        assert back.channels == 2
        assert np.max(np.abs(back.samples - samples)) <= 1.0 / 32767.0

    def test_zero_length_buffer_writes_bare_header(self, tmp_path):
        path = tmp_path / "empty.wav"
        write_wav(AudioBuffer(SR, np.zeros((0, 2))), path)
        assert path.stat().st_size == 44
        assert read_wav(path).frames == 0

    def test_24_bit_is_rejected(self, tmp_path):
        path = tmp_path / "deep.wav"
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(3)
            w.setframerate(SR)
            w.writeframes(b"\x00\x00\x00" * 10)
        with pytest.raises(UnsupportedInputFormat):
            read_wav(path)

    def test_non_riff_is_rejected(self, tmp_path):
        path = tmp_path / "junk.wav"
        path.write_bytes(b"not a wav file at all")
        with pytest.raises(UnsupportedInputFormat):
            read_wav(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingSampleFile):
            read_wav(tmp_path / "absent.wav")

    def test_mono_read(self, tmp_path):
        path = tmp_path / "mono.wav"
        mono = np.linspace(-0.5, 0.5, 100).reshape(-1, 1)
        write_wav(AudioBuffer(22050, mono), path)
        back = read_wav(path)
        assert back.channels == 1
        assert back.sample_rate == 22050


class TestChain:
    def test_default_chain_order(self):
        state = state_of("foo.src = osc('sine')")
        nodes, warnings = build_chain(state.voices["foo"])
        assert tuple(n.kind for n in nodes) == CHAIN_ORDER
        assert warnings == []

    def test_defaults(self):
        state = state_of("foo.src = osc('sine')")
        nodes, _ = build_chain(state.voices["foo"])
        by_kind = {n.kind: n.params for n in nodes}
        assert by_kind["gain"] == {"gain": 1.0}
        assert by_kind["panner"] == {"pan": 0.0}
        assert by_kind["eq3"] == {"low": 0.0, "mid": 0.0, "high": 0.0}
        assert by_kind["reverb"] == {"time": 0.0}

    def test_params_plumbed_from_first_elements(self):
        state = state_of(
            "foo.src = osc('saw')\nfoo.gain = [0.5]\nfoo.eq.low = [-6]\n"
            "foo.reverb.time = [1.5]\nfoo.pan = [0.25, 0.75]"
        )
        by_kind = {n.kind: n.params for n in build_chain(state.voices["foo"])[0]}
        assert by_kind["gain"]["gain"] == 0.5
        assert by_kind["eq3"]["low"] == -6.0
        assert by_kind["reverb"]["time"] == 1.5
        assert by_kind["panner"]["pan"] == 0.25

    def test_youtube_source_warns(self):
        state = state_of("foo.src = youtube('http://example.com/v')")
        _, warnings = build_chain(state.voices["foo"])
        assert warnings and "silent" in warnings[0]


class TestRender:
    def test_amp_sequence_rms_ratio(self):
        # alternating amp 1.0 / 0.5 on equal steps: segment RMS ratio 2:1
        result = render_source(
            "foo.src = osc('sine')\nfoo.note = [69]\n"
            "foo.amp = [1, 0.5]\nfoo.cdur = [1/4, 1/4]",
            2.0,
        )
        mono = result.buffer.mono()
        seg = int(0.5 * SR)
        loud = np.sqrt(np.mean(mono[:seg] ** 2))
        soft = np.sqrt(np.mean(mono[seg : 2 * seg] ** 2))
        assert loud / soft == pytest.approx(2.0, rel=0.05)

    def test_gain_zero_is_silence(self):
        result = render_source(
            "foo.src = osc('square')\nfoo.note = [60]\nfoo.gain = [0]", 1.0
        )
        assert np.all(result.buffer.samples == 0.0)

    def test_pan_center_has_identical_channels(self):
        result = render_source(
            "foo.src = osc('sine')\nfoo.note = [69]\nfoo.pan = [0]", 1.0
        )
        left, right = result.buffer.samples.T
        assert np.allclose(left, right, atol=1e-12)
        assert np.max(np.abs(left)) > 0.1

    def test_pan_hard_left_zeroes_right(self):
        result = render_source(
            "foo.src = osc('sine')\nfoo.note = [69]\nfoo.pan = [-1]", 1.0
        )
        left, right = result.buffer.samples.T
        assert np.max(np.abs(right)) <= 1e-15
        assert np.max(np.abs(left)) > 0.1

    def test_equal_power_pan_law(self):
        energies = []
        for pan in (-1, -0.5, 0, 0.25, 1):
            result = render_source(
                f"foo.src = osc('sine')\nfoo.note = [69]\nfoo.pan = [{pan}]", 0.5
            )
            left, right = result.buffer.samples.T
            energies.append(np.sum(left**2) + np.sum(right**2))
        assert max(energies) - min(energies) <= 1e-9 * max(energies)

    def test_render_determinism(self):
        src = (
            "foo.src = osc('triangle')\nfoo.note = [60, 64, 67]\n"
            "foo.cdur = [1/8]\nbar.src = osc('saw')\nbar.note = [48]\nbar.pan = [0.5]"
        )
        a = render_source(src, 2.0)
        b = render_source(src, 2.0)
        assert a.buffer.samples.tobytes() == b.buffer.samples.tobytes()

    def test_linearity_in_amp(self):
        loud = render_source(
            "foo.src = osc('sine')\nfoo.note = [69]\nfoo.amp = [0.8]", 1.0
        )
        half = render_source(
            "foo.src = osc('sine')\nfoo.note = [69]\nfoo.amp = [0.4]", 1.0
        )
        assert np.max(np.abs(half.buffer.samples - 0.5 * loud.buffer.samples)) <= 1e-9

    def test_envelope_bound(self):
        result = render_source(
            "foo.src = osc('square')\nfoo.note = [60]\n"
            "foo.amp = [0.7]\nfoo.gain = [0.9]",
            1.0,
        )
        assert np.max(np.abs(result.buffer.samples)) <= 0.7 * 0.9 + 1e-12

    def test_buffer_length_is_ceil_horizon(self):
        result = render_source("foo.src = osc('sine')\nfoo.note = [69]", 1.5)
        assert result.buffer.frames == math.ceil(1.5 * SR)

    def test_mix_clips_to_unit_range(self):
        src = "\n".join(
            f"v{i}.src = osc('square')\nv{i}.note = [60]" for i in range(4)
        )
        result = render_source(src, 0.5)
        assert np.max(np.abs(result.buffer.samples)) <= 1.0

    def test_youtube_voice_renders_silent_with_warning(self):
        result = render_source(
            "foo.src = youtube('http://example.com/v')\nfoo.pos = [10]", 1.0
        )
        assert np.all(result.buffer.samples == 0.0)
        assert any("youtube" in w for w in result.warnings)

    def test_eq_and_reverb_go_to_automation(self):
        result = render_source(
            "foo.src = osc('sine')\nfoo.note = [69]\nfoo.eq.low = [-3, 3]\n"
            "foo.reverb.time = [2]\nfoo.wobble = [7]\nfoo.cdur = [1/4]",
            1.01,
        )
        points = {(p.time, p.param): p.value for p in result.automation}
        assert points[(0.0, "eq.low")] == -3.0
        assert points[(0.5, "eq.low")] == 3.0
        assert points[(0.0, "reverb.time")] == 2.0
        assert points[(0.0, "wobble")] == 7.0
        # audible params never leak into the trace
        assert not any(p.param in ("freq", "amp", "gain", "pan", "pos")
                       for p in result.automation)

    def test_missing_sample_file(self, tmp_path):
        state = state_of(f"foo.src = sample('{tmp_path}/gone.wav')\nfoo.pos = [0]")
        with pytest.raises(MissingSampleFile):
            render(schedule(state, 1.0), state, SR)

    def test_sample_rate_mismatch(self, tmp_path):
        path = tmp_path / "slow.wav"
        write_wav(AudioBuffer(22050, np.zeros((100, 1))), path)
        state = state_of(f"foo.src = sample('{path}')\nfoo.pos = [0]")
        with pytest.raises(SampleRateMismatch):
            render(schedule(state, 0.5), state, SR)

    def test_sample_playback_from_offset(self, tmp_path):
        # one-second file whose value encodes its own time position
        ramp = (np.arange(SR) / SR).reshape(-1, 1) * 0.5
        path = tmp_path / "ramp.wav"
        write_wav(AudioBuffer(SR, ramp), path)
        state = state_of(
            f"foo.src = sample('{path}')\nfoo.pos = [0.5]\nfoo.cdur = [1/16]"
        )
        result = render(schedule(state, 0.125), state, SR)
        mono = result.buffer.mono()
        # envelope is 5 ms; sample mid-event and compare against the offset ramp
        idx = int(0.06 * SR)
        expected = 0.5 * (0.5 * SR + idx) / SR / math.sqrt(2.0)  # center pan
        assert mono[idx] == pytest.approx(expected, rel=1e-3)


class TestAnalyze:
    def sine_buffer(self, freq, seconds=1.0, sr=SR):
        t = np.arange(int(seconds * sr)) / sr
        mono = np.sin(2 * np.pi * freq * t)
        return AudioBuffer(sr, np.stack([mono, mono], axis=1))

    def test_440_peak_bin(self):
        frames = analyze(self.sine_buffer(440.0), 1024, 512)
        predicted = round(440 * 1024 / SR)
        assert predicted == 10
        for frame in frames:
            assert int(np.argmax(frame.magnitudes)) == predicted

    def test_zero_buffer_zero_magnitudes(self):
        frames = analyze(AudioBuffer(SR, np.zeros((4096, 2))), 1024, 512)
        assert frames
        for frame in frames:
            assert np.all(frame.magnitudes == 0.0)

    def test_two_sines_two_peaks(self):
        t = np.arange(SR) / SR
        mono = 0.5 * np.sin(2 * np.pi * 440 * t) + 0.5 * np.sin(2 * np.pi * 4000 * t)
        buf = AudioBuffer(SR, np.stack([mono, mono], axis=1))
        frame = analyze(buf, 1024, 512)[0]
        top_two = sorted(np.argsort(frame.magnitudes)[-2:])
        assert abs(top_two[0] - round(440 * 1024 / SR)) <= 1
        assert abs(top_two[1] - round(4000 * 1024 / SR)) <= 1

    def test_magnitudes_against_direct_dft(self):
        # naive O(N^2) DFT oracle on one window
        buf = self.sine_buffer(440.0, seconds=0.05)
        n = 512
        frame = analyze(buf, n, n)[0]
        window = 0.5 * (1 - np.cos(2 * np.pi * np.arange(n) / n))
        x = buf.mono()[:n] * window
        ks = np.arange(n // 2)
        oracle = np.abs(
            np.array(
                [np.sum(x * np.exp(-2j * np.pi * k * np.arange(n) / n)) for k in ks]
            )
        )
        assert np.allclose(frame.magnitudes, oracle, atol=1e-9)

    def test_parseval_consistency(self):
        buf = self.sine_buffer(440.0)
        n = 1024
        frame = analyze(buf, n, n)[0]
        window = 0.5 * (1 - np.cos(2 * np.pi * np.arange(n) / n))
        x = buf.mono()[:n] * window
        time_energy = np.sum(x**2)
        spectrum = np.fft.rfft(x)
        spectral_energy = (
            np.abs(spectrum[0]) ** 2
            + 2 * np.sum(np.abs(spectrum[1:-1]) ** 2)
            + np.abs(spectrum[-1]) ** 2
        ) / n
        assert spectral_energy == pytest.approx(time_energy, rel=0.01)
        # the exposed magnitudes cover the same energy (sans Nyquist bin)
        exposed = (
            np.abs(frame.magnitudes[0]) ** 2 + 2 * np.sum(frame.magnitudes[1:] ** 2)
        ) / n
        assert exposed == pytest.approx(time_energy, rel=0.01)

    def test_buffer_too_short(self):
        with pytest.raises(BufferTooShort):
            analyze(AudioBuffer(SR, np.zeros((100, 2))), 1024, 512)

    def test_fft_size_must_be_power_of_two(self):
        with pytest.raises(ValueError):
            analyze(self.sine_buffer(440.0), 1000, 512)

    def test_frame_times_step_by_hop(self):
        frames = analyze(self.sine_buffer(440.0), 1024, 512)
        times = [f.time for f in frames]
        assert times[0] == 0.0
        assert times[1] == pytest.approx(512 / SR)
