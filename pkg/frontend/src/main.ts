/**
 * Performer-facing environment: shared editor over the session socket,
 * eval on Ctrl+Enter, per-voice mixer sliders that write code, live
 * audio, and video layers behind the text.
 */

import { LivePlayer } from "./audio.js";
import { attach, EvalMessage, SessionCore } from "./client.js";
import { dumpState, emptyState, EngineMirror, evalProgram, parseProgram } from "./lang.js";
import {
  clampToSlider,
  MIXER_SLIDERS,
  sliderEditComponents,
  sliderFromState,
} from "./mixer.js";
import { textDiff } from "./ot.js";
import { VideoLayers } from "./video.js";

const editor = document.getElementById("editor") as HTMLTextAreaElement;
const status = document.getElementById("status")!;
const errorBox = document.getElementById("errors")!;
const mixerBox = document.getElementById("mixer")!;
const videoBox = document.getElementById("video-layers")!;
const evalButton = document.getElementById("eval-button")!;
const audioButton = document.getElementById("audio-button")!;

let engine: EngineMirror = emptyState();
const player = new LivePlayer();
const video = new VideoLayers(videoBox);
let core: SessionCore;
let applyingRemote = false;

function setStatus(text: string): void {
  status.textContent = text;
}

function showErrors(errors: { line: number; col: number; message: string }[]): void {
  errorBox.textContent = errors
    .map((e) => `${e.line}:${e.col}: ${e.message}`)
    .join("\n");
  errorBox.classList.toggle("visible", errors.length > 0);
}

function onLocalInput(): void {
  if (applyingRemote || !core) return;
  const diff = textDiff(core.doc, editor.value);
  if (diff !== null) core.edit(diff);
}

function applyEval(msg: EvalMessage): void {
  showErrors(msg.errors);
  if (msg.errors.length > 0) return; // keep the old sound running
  const parsed = parseProgram(core.doc);
  const outcome = evalProgram(engine, parsed.statements);
  engine = outcome.state;
  player.update(engine);
  video.update(engine);
  rebuildMixer();
  setStatus(`evaluated v${msg.version} (${Object.keys(engine.voices).length} voices)`);
  console.debug("engine dump", JSON.stringify(dumpState(engine)));
}

function rebuildMixer(): void {
  mixerBox.textContent = "";
  for (const voiceName of Object.keys(engine.voices).sort()) {
    const strip = document.createElement("div");
    strip.className = "strip";
    const title = document.createElement("h3");
    title.textContent = voiceName;
    strip.appendChild(title);
    for (const spec of MIXER_SLIDERS) {
      const label = document.createElement("label");
      label.textContent = spec.param;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(spec.min);
      slider.max = String(spec.max);
      slider.step = String(spec.step);
      slider.value = String(sliderFromState(engine, voiceName, spec));
      slider.addEventListener("change", () => {
        const value = clampToSlider(spec, Number(slider.value));
        const components = sliderEditComponents(core.doc, voiceName, spec.param, value);
        if (components !== null) {
          core.edit(components); // the gesture is a code edit, shared like any other
          core.requestEval();
        }
      });
      label.appendChild(slider);
      strip.appendChild(label);
    }
    mixerBox.appendChild(strip);
  }
}

function connect(): void {
  const url = `ws://${location.host}/session`;
  const socket = new WebSocket(url);
  const wired = attach(socket, `performer-${Math.floor(Math.random() * 1e4)}`, {
    onDocChange: (doc) => {
      applyingRemote = true;
      const cursor = editor.selectionStart;
      editor.value = doc;
      editor.selectionStart = editor.selectionEnd = Math.min(cursor, doc.length);
      applyingRemote = false;
    },
    onWelcome: (msg) => setStatus(`connected as ${msg.cid} at v${msg.version}`),
    onEval: applyEval,
    onError: (msg) => setStatus(`server error ${msg.code}: ${msg.message}`),
  });
  core = wired.core;
  socket.onopen = () => core.hello();
  socket.onmessage = (event) => wired.onMessage(String(event.data));
  socket.onclose = () => {
    setStatus("disconnected, retrying…");
    setTimeout(connect, 1000); // reconnect resynchronizes from a fresh welcome
  };
}

editor.addEventListener("input", onLocalInput);
editor.addEventListener("keydown", (event) => {
  if ((event.ctrlKey || event.metaKey) && event.key === "Enter") {
    event.preventDefault();
    core?.requestEval();
  }
});
evalButton.addEventListener("click", () => core?.requestEval());
audioButton.addEventListener("click", () => {
  player.start();
  player.update(engine);
  setStatus("audio running");
});

connect();
