/**
 * Video layers behind the editor for voices with a youtube source.
 * Strictly best-effort: a failed embed stays silent and invisible.
 */

import { EngineMirror } from "./lang.js";

function embedUrl(ref: string): string | null {
  try {
    const url = new URL(ref);
    const id = url.searchParams.get("v") ?? url.pathname.split("/").pop();
    if (!id) return null;
    return `https://www.youtube.com/embed/${encodeURIComponent(id)}?autoplay=1&mute=1&controls=0`;
  } catch {
    return null;
  }
}

export class VideoLayers {
  private frames = new Map<string, HTMLIFrameElement>();

  constructor(private container: HTMLElement) {}

  update(state: EngineMirror): void {
    const wanted = new Map<string, string>();
    for (const [name, voice] of Object.entries(state.voices)) {
      if (voice.source?.kind === "youtube") {
        const url = embedUrl(voice.source.ref);
        if (url !== null) wanted.set(name, url);
      }
    }
    for (const [name, frame] of this.frames) {
      if (!wanted.has(name)) {
        frame.remove();
        this.frames.delete(name);
      }
    }
    for (const [name, url] of wanted) {
      const existing = this.frames.get(name);
      if (existing) {
        if (existing.src !== url) existing.src = url;
        continue;
      }
      try {
        const frame = document.createElement("iframe");
        frame.className = "video-layer";
        frame.src = url;
        frame.allow = "autoplay";
        this.container.appendChild(frame);
        this.frames.set(name, frame);
      } catch {
        // embedding is decoration; never let it break the session
      }
    }
  }
}
