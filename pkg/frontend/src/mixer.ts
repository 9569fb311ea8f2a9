/**
 * Mixer controls that stay inside the shared document.
 *
 * A slider never bypasses the code: moving it writes the equivalent
 * single-element assignment (`voice.gain = [0.5]`) into the buffer, so
 * every gesture is visible to and mergeable by all collaborators, and
 * any state a slider can reach is reachable by typing the same line.
 */

import { Component, textDiff } from "./ot.js";
import { EngineMirror } from "./lang.js";

export interface SliderSpec {
  param: string;
  min: number;
  max: number;
  step: number;
  fallback: number;
}

// gain/pan bounds are the engine's clamp ranges; the eq/reverb bounds
// are display ranges only (the engine stores those unclamped)
export const MIXER_SLIDERS: SliderSpec[] = [
  { param: "gain", min: 0, max: 1, step: 0.01, fallback: 1 },
  { param: "pan", min: -1, max: 1, step: 0.01, fallback: 0 },
  { param: "eq.low", min: -24, max: 24, step: 0.5, fallback: 0 },
  { param: "eq.mid", min: -24, max: 24, step: 0.5, fallback: 0 },
  { param: "eq.high", min: -24, max: 24, step: 0.5, fallback: 0 },
  { param: "reverb.time", min: 0, max: 10, step: 0.1, fallback: 0 },
];

export function clampToSlider(spec: SliderSpec, value: number): number {
  return Math.min(spec.max, Math.max(spec.min, value));
}

export function formatValue(value: number): string {
  return String(Math.round(value * 1e6) / 1e6);
}

/** The assignment line equivalent to a slider position. */
export function codeForSlider(voice: string, param: string, value: number): string {
  return `${voice}.${param} = [${formatValue(value)}]`;
}

/** Slider position implied by the engine state (first element convention). */
export function sliderFromState(
  state: EngineMirror,
  voice: string,
  spec: SliderSpec,
): number {
  const seq = state.voices[voice]?.params[spec.param];
  if (!seq || seq.length === 0) return spec.fallback;
  return clampToSlider(spec, seq[0]);
}

const escapeRe = (s: string) => s.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");

/**
 * New buffer text with the slider's assignment written in: the last
 * assignment to voice.param is replaced in place, otherwise the line is
 * appended.
 */
export function docWithSliderEdit(
  doc: string,
  voice: string,
  param: string,
  value: number,
): string {
  const line = codeForSlider(voice, param, value);
  const lines = doc.split("\n");
  const re = new RegExp(`^\\s*${escapeRe(voice)}\\.${escapeRe(param)}\\s*=`);
  for (let i = lines.length - 1; i >= 0; i -= 1) {
    if (re.test(lines[i])) {
      lines[i] = line;
      return lines.join("\n");
    }
  }
  if (doc === "") return line + "\n";
  return doc.endsWith("\n") ? doc + line + "\n" : doc + "\n" + line + "\n";
}

/** The OT components a slider gesture contributes to the shared doc. */
export function sliderEditComponents(
  doc: string,
  voice: string,
  param: string,
  value: number,
): Component[] | null {
  return textDiff(doc, docWithSliderEdit(doc, voice, param, value));
}
