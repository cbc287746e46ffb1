/**
 * Browser entry point: wires the prompt panel, edit panel, viewport, and
 * gallery to the protocol client over a WebSocket to the serving origin.
 */

import {
  MotionDocument,
  durationSeconds,
  parseInterchange,
} from "./interchange.js";
import { ProtocolClient, ServerError, webSocketTransport } from "./protocol.js";
import {
  BODY_PARTS,
  STYLE_NAMES,
  UiSessionState,
  validateExtensionSeconds,
} from "./state.js";
import {
  AVATAR_VARIANTS,
  defaultCamera,
  drawSkeleton,
  frameForTime,
  orbit,
  pan,
  zoom,
} from "./viewport.js";

interface GalleryEntryDto {
  id: string;
  caption?: string;
  [key: string]: unknown;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${scheme}://${location.host}/ws`);
  const client = new ProtocolClient(webSocketTransport(ws));
  const state = new UiSessionState();

  const docs = new Map<string, MotionDocument>();
  let viewedDoc: MotionDocument | null = null;
  let camera = defaultCamera();
  let avatarIndex = 0;
  let videoAvailable: boolean | null = null; // null = not probed yet

  const canvas = el<HTMLCanvasElement>("viewport");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");
  const notice = el<HTMLDivElement>("notice");
  const promptRows = el<HTMLDivElement>("prompt-rows");
  const results = el<HTMLDivElement>("results");
  const galleryGrid = el<HTMLDivElement>("gallery-grid");
  const scrub = el<HTMLInputElement>("scrub");
  const timeLabel = el<HTMLSpanElement>("time-label");
  const playBtn = el<HTMLButtonElement>("play");
  const extendInput = el<HTMLInputElement>("extend-seconds");
  const blendBtn = el<HTMLButtonElement>("blend");
  const videoBtn = el<HTMLButtonElement>("download-video");

  // Per-control request queues: one in flight each, the rest wait visibly.
  const queues = new Map<string, Promise<unknown>>();
  function enqueue<T>(control: string, job: () => Promise<T>): Promise<T> {
    const prev = queues.get(control) ?? Promise.resolve();
    const next = prev.then(job, job);
    queues.set(control, next.catch(() => undefined));
    return next;
  }

  function showError(err: unknown): void {
    const text =
      err instanceof ServerError ? `${err.code}: ${err.message}` : String(err);
    notice.textContent = text;
    notice.classList.add("visible");
    setTimeout(() => notice.classList.remove("visible"), 6000);
  }

  function registerClip(payload: Record<string, unknown>): MotionDocument {
    const doc = parseInterchange(payload["document"]);
    docs.set(doc.id, doc);
    return doc;
  }

  function viewClip(doc: MotionDocument): void {
    viewedDoc = doc;
    state.selectClip(doc.id, doc.frames.length);
    scrub.max = String(doc.frames.length - 1);
    scrub.value = "0";
    updateEditPanel();
    render();
  }

  // -- prompt panel -----------------------------------------------------------
  function renderPromptRows(): void {
    promptRows.innerHTML = "";
    if (state.activeTab === "file") {
      const input = document.createElement("input");
      input.type = "file";
      input.accept = ".json,.gltf,application/json";
      input.addEventListener("change", () => {
        const file = input.files?.[0];
        if (!file) return;
        void file.text().then((text) =>
          enqueue("upload", () => client.call("upload_motion", { data: text }))
            .then((payload) => {
              const doc = registerClip(payload);
              addResultCard(doc, `uploaded ${file.name}`);
            })
            .catch(showError),
        );
      });
      promptRows.appendChild(input);
      return;
    }
    state.promptBoxes.forEach((text, i) => {
      const box = document.createElement("input");
      box.type = "text";
      box.placeholder = "Describe a dance…";
      box.value = text;
      box.addEventListener("input", () => state.setPromptBox(i, box.value));
      promptRows.appendChild(box);
    });
  }

  function addResultCard(doc: MotionDocument, label: string): void {
    const card = document.createElement("button");
    card.className = "card";
    card.textContent = `${label} · ${durationSeconds(doc).toFixed(1)}s`;
    card.addEventListener("click", () => viewClip(doc));
    results.appendChild(card);
  }

  el<HTMLButtonElement>("add-box").addEventListener("click", () => {
    state.addPromptBox();
    renderPromptRows();
  });

  el<HTMLButtonElement>("submit").addEventListener("click", () => {
    const prompts = state.promptsToSubmit();
    if (prompts.length === 0) {
      showError(new Error("enter at least one prompt"));
      return;
    }
    for (const prompt of prompts) {
      enqueue(`generate:${prompt}`, () =>
        client.call("generate", { prompt, seed: Date.now() % 100000 }),
      )
        .then((payload) => {
          const clips = payload["clips"] as Array<Record<string, unknown>>;
          clips.forEach((c, i) => addResultCard(registerClip(c), `${prompt} #${i + 1}`));
        })
        .catch(showError);
    }
  });

  for (const tab of ["text", "file"] as const) {
    el<HTMLButtonElement>(`tab-${tab}`).addEventListener("click", () => {
      state.setTab(tab);
      el(`tab-text`).classList.toggle("active", tab === "text");
      el(`tab-file`).classList.toggle("active", tab === "file");
      renderPromptRows();
    });
  }

  // -- edit panel -------------------------------------------------------------
  const styleSelect = el<HTMLSelectElement>("style-select");
  for (const name of STYLE_NAMES) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    styleSelect.appendChild(opt);
  }
  const partSelect = el<HTMLSelectElement>("part-select");
  for (const part of BODY_PARTS) {
    const opt = document.createElement("option");
    opt.value = part;
    opt.textContent = part;
    partSelect.appendChild(opt);
  }

  function updateEditPanel(): void {
    const enabled = state.editEnabled;
    for (const id of ["extend-go", "style-go", "part-go", "add-gallery", "download-gltf", "download-video"]) {
      el<HTMLButtonElement>(id).disabled = !enabled;
    }
    blendBtn.disabled = !state.blendEnabled;
  }

  function editOp(control: string, op: string, params: Record<string, unknown>): void {
    enqueue(control, () => client.call(op, params))
      .then((payload) => viewClip(registerClip(payload)))
      .catch(showError);
  }

  el<HTMLButtonElement>("extend-go").addEventListener("click", () => {
    const seconds = Number(extendInput.value);
    const problem = validateExtensionSeconds(seconds);
    if (problem) {
      showError(new Error(problem));
      return;
    }
    if (state.selectedClip) {
      editOp("extend", "extend", { id: state.selectedClip, seconds });
    }
  });

  el<HTMLButtonElement>("style-go").addEventListener("click", () => {
    if (state.selectedClip) {
      editOp("style", "style", { id: state.selectedClip, style: styleSelect.value });
    }
  });

  el<HTMLButtonElement>("part-go").addEventListener("click", () => {
    const text = el<HTMLInputElement>("part-text").value.trim();
    if (!text) {
      showError(new Error("describe how the body part should move"));
      return;
    }
    if (state.selectedClip) {
      editOp("edit_part", "edit_part", { id: state.selectedClip, part: partSelect.value, text });
    }
  });

  blendBtn.addEventListener("click", () => {
    if (!state.blendEnabled) return;
    const [a, b] = state.gallerySelection;
    editOp("blend", "blend", { a, b });
  });

  // -- gallery & downloads ------------------------------------------------------
  function refreshGallery(): void {
    enqueue("gallery", () => client.call("gallery_list", {}))
      .then((payload) => {
        const entries = (payload["entries"] ?? []) as GalleryEntryDto[];
        galleryGrid.innerHTML = "";
        for (const entry of entries) {
          const thumb = document.createElement("button");
          thumb.className = "thumb";
          thumb.textContent = entry.caption ? String(entry.caption) : entry.id.slice(0, 8);
          thumb.classList.toggle("selected", state.gallerySelection.includes(entry.id));
          thumb.addEventListener("click", () => {
            state.toggleGallerySelection(entry.id);
            refreshGallery();
            updateEditPanel();
          });
          galleryGrid.appendChild(thumb);
        }
      })
      .catch(showError);
  }

  el<HTMLButtonElement>("add-gallery").addEventListener("click", () => {
    if (!state.selectedClip) return;
    enqueue("gallery", () => client.call("gallery_add", { id: state.selectedClip }))
      .then(() => refreshGallery())
      .catch(showError);
  });

  el<HTMLButtonElement>("download-gltf").addEventListener("click", () => {
    if (!state.selectedClip) return;
    enqueue("export", () => client.call("export_gltf", { id: state.selectedClip }))
      .then((payload) => {
        const b64 = payload["gltf_base64"] as string;
        const bytes = Uint8Array.from(atob(b64), (c) => c.charCodeAt(0));
        const blob = new Blob([bytes], { type: "model/gltf+json" });
        const a = document.createElement("a");
        a.href = URL.createObjectURL(blob);
        a.download = String(payload["filename"] ?? "clip.gltf");
        a.click();
        URL.revokeObjectURL(a.href);
      })
      .catch(showError);
  });

  videoBtn.addEventListener("click", () => {
    if (!state.selectedClip) return;
    enqueue("export", () =>
      client.call("export_frames", {
        id: state.selectedClip,
        out_dir: `renders/${state.selectedClip}`,
        encode: true,
      }),
    )
      .then((payload) => {
        videoAvailable = true;
        notice.textContent = `video written server-side: ${String(payload["video_path"])}`;
        notice.classList.add("visible");
      })
      .catch((err) => {
        if (err instanceof ServerError && err.code === "NOT_CONFIGURED") {
          videoAvailable = false;
          videoBtn.disabled = true;
          videoBtn.title = "NOT_CONFIGURED: the server has no video encoder template";
        }
        showError(err);
      });
  });
  void videoAvailable;

  // -- viewport ---------------------------------------------------------------
  function render(): void {
    ctx!.fillStyle = "#10131a";
    (ctx as CanvasRenderingContext2D).fillRect(0, 0, canvas.width, canvas.height);
    if (!viewedDoc) return;
    const frame = viewedDoc.frames[state.playback.frameIndex];
    drawSkeleton(
      ctx!,
      camera,
      frame,
      canvas.width,
      canvas.height,
      AVATAR_VARIANTS[avatarIndex],
      state.visibility.skeleton,
    );
    scrub.value = String(state.playback.frameIndex);
    timeLabel.textContent = `${(state.playback.frameIndex / viewedDoc.fps).toFixed(2)}s / ${durationSeconds(viewedDoc).toFixed(1)}s`;
  }

  let dragging: "orbit" | "pan" | null = null;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("mousedown", (ev) => {
    dragging = ev.shiftKey ? "pan" : "orbit";
    lastX = ev.clientX;
    lastY = ev.clientY;
  });
  window.addEventListener("mouseup", () => {
    dragging = null;
  });
  window.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    const dx = ev.clientX - lastX;
    const dy = ev.clientY - lastY;
    lastX = ev.clientX;
    lastY = ev.clientY;
    camera =
      dragging === "orbit"
        ? orbit(camera, -dx * 0.01, dy * 0.01)
        : pan(camera, -dx * 0.004, dy * 0.004);
    render();
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    camera = zoom(camera, ev.deltaY > 0 ? 1.1 : 0.9);
    render();
  });

  playBtn.addEventListener("click", () => {
    state.setPlaying(!state.playback.playing);
    playBtn.textContent = state.playback.playing ? "⏸" : "▶";
  });
  scrub.addEventListener("input", () => {
    state.setPlaying(false);
    playBtn.textContent = "▶";
    state.seek(Number(scrub.value));
    render();
  });
  el<HTMLInputElement>("show-skeleton").addEventListener("change", (ev) => {
    state.visibility.skeleton = (ev.target as HTMLInputElement).checked;
    render();
  });
  const avatarSelect = el<HTMLSelectElement>("avatar-select");
  AVATAR_VARIANTS.forEach((v, i) => {
    const opt = document.createElement("option");
    opt.value = String(i);
    opt.textContent = v.name;
    avatarSelect.appendChild(opt);
  });
  avatarSelect.addEventListener("change", () => {
    avatarIndex = Number(avatarSelect.value);
    render();
  });

  // 20 fps playback clock, driven by the clip's own frame rate.
  let playbackStart = performance.now();
  let startFrame = 0;
  setInterval(() => {
    if (!viewedDoc || !state.playback.playing) {
      playbackStart = performance.now();
      startFrame = state.playback.frameIndex;
      return;
    }
    const elapsed = (performance.now() - playbackStart) / 1000;
    state.playback.frameIndex =
      (startFrame + frameForTime(elapsed, viewedDoc.fps, viewedDoc.frames.length)) %
      viewedDoc.frames.length;
    render();
  }, 1000 / 20);

  ws.addEventListener("open", () => {
    refreshGallery();
  });
  ws.addEventListener("close", () => showError(new Error("server connection closed")));

  renderPromptRows();
  updateEditPanel();
  render();
}

window.addEventListener("DOMContentLoaded", main);
