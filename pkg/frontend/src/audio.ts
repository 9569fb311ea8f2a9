/**
 * Live playback through the browser's native audio graph.
 *
 * Each voice gets the engine's standard chain built from native nodes:
 * source -> eq3 (three biquads) -> reverb (convolver) -> panner -> gain
 * -> analyser -> destination. A lookahead timer walks every voice's
 * cyclic steps exactly like the offline engine (cdur as whole-note
 * fractions, independent per-parameter cycling) and schedules
 * oscillators ahead of the clock. Definition changes take effect at the
 * next step boundary; voices keep their step counter unless their cdur
 * length changed.
 */

import { EngineMirror, noteToFreq, Voice } from "./lang.js";

const LOOKAHEAD_SECONDS = 0.2;
const TICK_MS = 50;
const EDGE_RAMP = 0.005;

interface VoiceChain {
  eqLow: BiquadFilterNode;
  eqMid: BiquadFilterNode;
  eqHigh: BiquadFilterNode;
  reverb: ConvolverNode;
  reverbMix: GainNode;
  dry: GainNode;
  panner: StereoPannerNode;
  gain: GainNode;
  analyser: AnalyserNode;
  input: GainNode;
}

interface VoiceRun {
  chain: VoiceChain;
  step: number;
  nextTime: number;
  cdurLength: number;
}

function stepValue(seq: number[] | undefined, k: number, fallback: number): number {
  if (!seq || seq.length === 0) return fallback;
  return seq[k % seq.length];
}

function impulseResponse(ctx: AudioContext, seconds: number): AudioBuffer {
  const length = Math.max(1, Math.floor(seconds * ctx.sampleRate));
  const buffer = ctx.createBuffer(2, length, ctx.sampleRate);
  for (let ch = 0; ch < 2; ch += 1) {
    const data = buffer.getChannelData(ch);
    for (let i = 0; i < length; i += 1) {
      // deterministic decaying noise tail
      const x = Math.sin(i * 12.9898 + ch * 78.233) * 43758.5453;
      data[i] = (x - Math.floor(x) - 0.5) * 2 * (1 - i / length) ** 2;
    }
  }
  return buffer;
}

export class LivePlayer {
  private ctx: AudioContext | null = null;
  private runs = new Map<string, VoiceRun>();
  private state: EngineMirror = { tempo_bpm: 120, voices: {} };
  private timer: ReturnType<typeof setInterval> | null = null;

  start(): void {
    if (this.ctx !== null) return;
    this.ctx = new AudioContext();
    this.timer = setInterval(() => this.pump(), TICK_MS);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
    for (const run of this.runs.values()) run.chain.gain.disconnect();
    this.runs.clear();
    void this.ctx?.close();
    this.ctx = null;
  }

  /** Swap definitions in; applied per voice at its next step boundary. */
  update(state: EngineMirror): void {
    this.state = state;
    if (this.ctx === null) return;
    for (const [name, run] of this.runs) {
      const voice = state.voices[name];
      if (!voice || Object.keys(voice.params).length === 0) {
        run.chain.gain.disconnect();
        this.runs.delete(name);
        continue;
      }
      const cdur = voice.params["cdur"] ?? [0.25];
      if (cdur.length !== run.cdurLength) {
        run.step = 0; // cdur length changed: the cycle restarts
        run.cdurLength = cdur.length;
      }
    }
  }

  analyserFor(voice: string): AnalyserNode | null {
    return this.runs.get(voice)?.chain.analyser ?? null;
  }

  private buildChain(): VoiceChain {
    const ctx = this.ctx!;
    const input = ctx.createGain();
    const eqLow = ctx.createBiquadFilter();
    eqLow.type = "lowshelf";
    eqLow.frequency.value = 320;
    const eqMid = ctx.createBiquadFilter();
    eqMid.type = "peaking";
    eqMid.frequency.value = 1000;
    const eqHigh = ctx.createBiquadFilter();
    eqHigh.type = "highshelf";
    eqHigh.frequency.value = 3200;
    const reverb = ctx.createConvolver();
    reverb.buffer = impulseResponse(ctx, 2);
    const reverbMix = ctx.createGain();
    reverbMix.gain.value = 0;
    const dry = ctx.createGain();
    const panner = ctx.createStereoPanner();
    const gain = ctx.createGain();
    const analyser = ctx.createAnalyser();
    analyser.fftSize = 1024;

    input.connect(eqLow);
    eqLow.connect(eqMid);
    eqMid.connect(eqHigh);
    eqHigh.connect(dry);
    eqHigh.connect(reverb);
    reverb.connect(reverbMix);
    dry.connect(panner);
    reverbMix.connect(panner);
    panner.connect(gain);
    gain.connect(analyser);
    analyser.connect(ctx.destination);
    return { eqLow, eqMid, eqHigh, reverb, reverbMix, dry, panner, gain, analyser, input };
  }

  private pump(): void {
    const ctx = this.ctx;
    if (ctx === null) return;
    const until = ctx.currentTime + LOOKAHEAD_SECONDS;
    for (const [name, voice] of Object.entries(this.state.voices)) {
      if (Object.keys(voice.params).length === 0) continue;
      if (voice.source === null || voice.source.kind === "youtube") continue;
      let run = this.runs.get(name);
      if (!run) {
        run = {
          chain: this.buildChain(),
          step: 0,
          nextTime: ctx.currentTime + 0.05,
          cdurLength: (voice.params["cdur"] ?? [0.25]).length,
        };
        this.runs.set(name, run);
      }
      while (run.nextTime < until) {
        this.scheduleStep(name, voice, run, run.nextTime);
        const cdur = voice.params["cdur"] ?? [0.25];
        const whole = 240 / this.state.tempo_bpm;
        run.nextTime += stepValue(cdur, run.step, 0.25) * whole;
        run.step += 1;
      }
    }
  }

  private scheduleStep(name: string, voice: Voice, run: VoiceRun, at: number): void {
    const ctx = this.ctx!;
    const k = run.step;
    const cdur = voice.params["cdur"] ?? [0.25];
    const whole = 240 / this.state.tempo_bpm;
    const duration = stepValue(cdur, k, 0.25) * whole;
    const amp = stepValue(voice.params["amp"], k, 1);
    const chain = run.chain;

    chain.gain.gain.setValueAtTime(stepValue(voice.params["gain"], k, 1), at);
    chain.panner.pan.setValueAtTime(stepValue(voice.params["pan"], k, 0), at);
    chain.eqLow.gain.setValueAtTime(stepValue(voice.params["eq.low"], k, 0), at);
    chain.eqMid.gain.setValueAtTime(stepValue(voice.params["eq.mid"], k, 0), at);
    chain.eqHigh.gain.setValueAtTime(stepValue(voice.params["eq.high"], k, 0), at);
    chain.reverbMix.gain.setValueAtTime(
      Math.min(1, stepValue(voice.params["reverb.time"], k, 0) / 10),
      at,
    );

    if (voice.source!.kind !== "osc") return; // sample playback is server-side only

    const osc = ctx.createOscillator();
    osc.type = voice.source!.ref === "saw" ? "sawtooth" : (voice.source!.ref as OscillatorType);
    const note = voice.params["note"];
    osc.frequency.value = note && note.length ? noteToFreq(note[k % note.length]) : 440;

    const envelope = ctx.createGain();
    const ramp = Math.min(EDGE_RAMP, duration / 2);
    envelope.gain.setValueAtTime(0, at);
    envelope.gain.linearRampToValueAtTime(amp, at + ramp);
    envelope.gain.setValueAtTime(amp, at + duration - ramp);
    envelope.gain.linearRampToValueAtTime(0, at + duration);

    osc.connect(envelope);
    envelope.connect(chain.input);
    osc.start(at);
    osc.stop(at + duration + 0.01);
    osc.onended = () => {
      osc.disconnect();
      envelope.disconnect();
    };
  }
}
