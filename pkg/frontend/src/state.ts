/**
 * UI session state and its invariants, kept DOM-free so the rules are
 * directly testable: tab/prompt-box bookkeeping, gallery selection (blend
 * requires exactly two picks), playback bounds, and the client-side
 * extension cap.
 */

export const STYLE_NAMES = [
  "angry", "childlike", "depressed", "happy", "proud", "strutting",
] as const;

export const BODY_PARTS = ["arms", "legs", "upper body", "lower body"] as const;

export const MAX_EXTENSION_SECONDS = 5;

export type Tab = "text" | "file";

export interface Playback {
  frameIndex: number;
  playing: boolean;
}

export class UiSessionState {
  activeTab: Tab = "text";
  promptBoxes: string[] = [""];
  selectedClip: string | null = null;
  gallerySelection: string[] = [];
  playback: Playback = { frameIndex: 0, playing: false };
  visibility = { skeleton: true };
  /** Frame count of the clip loaded in the viewport; bounds playback. */
  loadedFrames = 0;

  setTab(tab: Tab): void {
    this.activeTab = tab;
  }

  addPromptBox(): void {
    this.promptBoxes.push("");
  }

  setPromptBox(index: number, text: string): void {
    if (index < 0 || index >= this.promptBoxes.length) {
      throw new RangeError(`no prompt box ${index}`);
    }
    this.promptBoxes[index] = text;
  }

  /**
   * Prompts a submit should issue: one generate request per nonempty box.
   * Empty result means inline validation, no request.
   */
  promptsToSubmit(): string[] {
    return this.promptBoxes.map((p) => p.trim()).filter((p) => p.length > 0);
  }

  selectClip(id: string, frames: number): void {
    this.selectedClip = id;
    this.loadedFrames = frames;
    this.playback = { frameIndex: 0, playing: false };
  }

  /** Toggle a gallery thumbnail; at most two may be selected at once. */
  toggleGallerySelection(id: string): void {
    const at = this.gallerySelection.indexOf(id);
    if (at >= 0) {
      this.gallerySelection.splice(at, 1);
    } else if (this.gallerySelection.length < 2) {
      this.gallerySelection.push(id);
    }
  }

  get blendEnabled(): boolean {
    return this.gallerySelection.length === 2;
  }

  get editEnabled(): boolean {
    return this.selectedClip !== null;
  }

  /** Clamp into clip bounds; scrubbing past the end parks on the last frame. */
  seek(frameIndex: number): void {
    const last = Math.max(0, this.loadedFrames - 1);
    this.playback.frameIndex = Math.min(Math.max(0, Math.floor(frameIndex)), last);
  }

  setPlaying(playing: boolean): void {
    this.playback.playing = playing && this.loadedFrames > 0;
  }

  /** Advance one playback tick, wrapping at the end of the clip. */
  tick(): void {
    if (!this.playback.playing || this.loadedFrames === 0) return;
    this.playback.frameIndex = (this.playback.frameIndex + 1) % this.loadedFrames;
  }
}

/**
 * Client-side extension validation: null means submittable, otherwise the
 * inline message to show (the request must not be issued).
 */
export function validateExtensionSeconds(value: number): string | null {
  if (!Number.isFinite(value) || value <= 0) {
    return "extension length must be a positive number of seconds";
  }
  if (value > MAX_EXTENSION_SECONDS) {
    return `extensions are limited to ${MAX_EXTENSION_SECONDS} seconds`;
  }
  return null;
}
