"""User-facing generation and editing operations over the diffusion engine."""
from dataclasses import dataclass

import numpy as np

from .diffusion import DiffusionEngine, clip_to_features, expand_mask, features_to_clip
from .diffusion.sampling import DEFAULT_GUIDANCE, DEFAULT_T_EDIT, MAX_GEN_FRAMES
from .diffusion.tensor import FEATURES, renormalize_quat_columns
from .errors import CapExceeded, EmptyPrompt, ExtensionTooLong, RangeError, UnknownStyle
from .motion import FPS, MAX_FRAMES, MotionClip, Provenance, body_mask
from .skeleton import BODY_GROUPS, GROUPS_WITH_ROOT, normalize_group_name
from .synth import REST_ROOT_Y, STYLES
from .text import encode, null_embedding, parse_prompt

BLEND_CONNECTOR_FRAMES = 5 * FPS  # the fixed 5-second connecting segment
MAX_EXTENSION_S = 5.0
# context window for extending clips already near the denoiser frame limit
EXTEND_CONTEXT_FRAMES = 200


@dataclass(frozen=True)
class GenerationResult:
    clips: tuple  # exactly 3 MotionClips
    prompt: str
    seeds: tuple


def _rest_features(n_frames: int) -> np.ndarray:
    x = np.zeros((n_frames, FEATURES))
    x[:, 1] = REST_ROOT_Y
    x[:, 3::4] = 1.0  # identity quaternions (w = 1)
    return x


def _prompt_embedding(clip: MotionClip):
    """Condition for edits: the clip's most recent prompt, else null."""
    prompt = clip.last_prompt()
    if not prompt:
        return null_embedding()
    main, _ = parse_prompt(prompt)
    return encode(main) if main else null_embedding()


def generate_dance(engine: DiffusionEngine, prompt: str, duration_s: float, seed: int,
                   guidance_w: float = DEFAULT_GUIDANCE) -> GenerationResult:
    """Three variants for one prompt, sampled with seeds (seed, seed+1, seed+2).

    "restrict movements of <group>" clauses become generation-time masks
    holding the restricted joints at rest pose.
    """
    if not 0 < duration_s <= 10:
        raise RangeError(f"duration must be in (0, 10] s, got {duration_s}")
    main, constraints = parse_prompt(prompt)
    if not main:
        raise EmptyPrompt("prompt has no main clause")
    emb = encode(main)
    n_frames = int(round(duration_s * FPS))
    n_frames = max(1, min(n_frames, MAX_GEN_FRAMES))

    known = None
    rest = None
    if constraints:
        known = np.zeros((n_frames, FEATURES), dtype=bool)
        for group in constraints:
            for j in sorted(BODY_GROUPS[group]):
                known[:, 3 + 4 * j : 7 + 4 * j] = True
            if group in GROUPS_WITH_ROOT:
                known[:, :3] = True
        rest = _rest_features(n_frames)

    clips = []
    seeds = (seed, seed + 1, seed + 2)
    for s in seeds:
        if known is None:
            feats = engine.sample(emb, None, n_frames, guidance_w=guidance_w, seed=s)
        else:
            feats = engine.sample_inpaint(rest, known, emb, guidance_w=guidance_w, seed=s)
        clips.append(features_to_clip(feats, Provenance(kind="generated", prompts=(prompt,))))
    return GenerationResult(clips=tuple(clips), prompt=prompt, seeds=seeds)


def extend_dance(engine: DiffusionEngine, clip: MotionClip, extra_s: float, seed: int,
                 guidance_w: float = DEFAULT_GUIDANCE) -> MotionClip:
    """Append extra_s seconds of synthesized motion; the source is preserved
    bitwise as the output prefix."""
    if extra_s <= 0:
        raise RangeError(f"extension must be positive, got {extra_s}")
    if extra_s > MAX_EXTENSION_S:
        raise ExtensionTooLong(
            f"extensions are capped at {MAX_EXTENSION_S:g} s (longer ones degrade into stillness)")
    extra = int(round(extra_s * FPS))
    n_old = clip.n_frames
    if n_old + extra > MAX_FRAMES:
        raise CapExceeded("extension would exceed the 600 s clip cap")

    feats = clip_to_features(clip)
    max_ctx = engine.config.max_frames - extra
    ctx = min(n_old, EXTEND_CONTEXT_FRAMES, max_ctx)
    window = np.zeros((ctx + extra, FEATURES))
    window[:, 3::4] = 1.0
    window[:ctx] = feats[n_old - ctx :]
    known = np.zeros((ctx + extra, FEATURES), dtype=bool)
    known[:ctx] = True

    out = engine.sample_inpaint(window, known, _prompt_embedding(clip), guidance_w=guidance_w, seed=seed)
    full = np.concatenate([feats[: n_old - ctx], out], axis=0)
    prov = Provenance(kind="extended", prompts=clip.provenance.prompts, parents=(clip.id,))
    return features_to_clip(full, prov)


# Per-style default restyle strength.  Tempo-driven styles need a deeper
# re-diffusion than the T/2 default: the ancestral chain only reaches the
# faster oscillation modes when most of the source timing is re-sampled,
# while amplitude/posture styles transfer fine (and preserve more content)
# at T/2.
STYLE_T_EDIT = {"childlike": 80}


def apply_style(engine: DiffusionEngine, clip: MotionClip, style_name: str, seed: int,
                t_edit: int | None = None, guidance_w: float = DEFAULT_GUIDANCE) -> MotionClip:
    """Re-diffuse the clip under one of the six style tokens."""
    if style_name not in STYLES:
        raise UnknownStyle(f"unknown style: {style_name!r}")
    if t_edit is None:
        t_edit = STYLE_T_EDIT.get(style_name, DEFAULT_T_EDIT)
    if clip.n_frames > engine.config.max_frames:
        raise CapExceeded(f"clip too long to restyle ({clip.n_frames} frames)")
    # condition on the styled caption phrasing the model was trained with,
    # so the text channel reinforces the style token
    prompt = clip.last_prompt()
    main = parse_prompt(prompt)[0] if prompt else ""
    emb = encode(f"{main} in a {style_name} way") if main else encode(f"in a {style_name} way")
    feats = engine.restyle(clip_to_features(clip), emb, style_name,
                           t_edit=t_edit, guidance_w=guidance_w, seed=seed)
    prov = Provenance(kind="styled", prompts=clip.provenance.prompts, parents=(clip.id,), style=style_name)
    return features_to_clip(feats, prov)


def edit_body_part(engine: DiffusionEngine, clip: MotionClip, group: str, edit_text: str, seed: int,
                   guidance_w: float = DEFAULT_GUIDANCE) -> MotionClip:
    """Resynthesize one body group per edit_text; the complement (and the
    root, unless lower_body) is preserved bitwise."""
    if not edit_text or not edit_text.strip():
        raise EmptyPrompt("edit description is empty")
    group = normalize_group_name(group)
    if clip.n_frames > engine.config.max_frames:
        raise CapExceeded(f"clip too long to edit ({clip.n_frames} frames)")
    known = expand_mask(body_mask(group, clip.n_frames))
    out = engine.sample_inpaint(clip_to_features(clip), known, encode(edit_text),
                                guidance_w=guidance_w, seed=seed)
    prov = Provenance(kind="part_edited", prompts=clip.provenance.prompts + (edit_text,),
                      parents=(clip.id,))
    return features_to_clip(out, prov)


def blend_dances(engine: DiffusionEngine, a: MotionClip, b: MotionClip, seed: int,
                 guidance_w: float = DEFAULT_GUIDANCE) -> MotionClip:
    """Join two clips with a synthesized 5-second connector; both endpoints
    are preserved bitwise."""
    total = a.n_frames + BLEND_CONNECTOR_FRAMES + b.n_frames
    if total > engine.config.max_frames:
        raise CapExceeded(
            f"blend of {a.n_frames}+{BLEND_CONNECTOR_FRAMES}+{b.n_frames} frames exceeds "
            f"the {engine.config.max_frames}-frame limit")
    source = np.zeros((total, FEATURES))
    source[:, 3::4] = 1.0
    source[: a.n_frames] = clip_to_features(a)
    source[a.n_frames + BLEND_CONNECTOR_FRAMES :] = clip_to_features(b)
    known = np.zeros((total, FEATURES), dtype=bool)
    known[: a.n_frames] = True
    known[a.n_frames + BLEND_CONNECTOR_FRAMES :] = True

    ea, eb = _prompt_embedding(a), _prompt_embedding(b)
    mean = (ea.values + eb.values) / 2.0
    norm = np.linalg.norm(mean)
    emb = null_embedding() if norm < 1e-12 else type(ea)(values=mean / norm)

    out = engine.sample_inpaint(source, known, emb, guidance_w=guidance_w, seed=seed)
    out = _align_connector(out, a.n_frames, BLEND_CONNECTOR_FRAMES)
    prov = Provenance(kind="blended", prompts=a.provenance.prompts + b.provenance.prompts,
                      parents=(a.id, b.id))
    return features_to_clip(out, prov)


def _align_connector(feats: np.ndarray, n_a: int, n_conn: int) -> np.ndarray:
    """Seam alignment for the synthesized connector.

    The sampler produces a connector that is plausible on its own but lands
    with a feature-space offset at each junction. Shift the connector so its
    boundary frames continue the endpoint clips' last observed velocity, with
    the correction decaying linearly toward the connector's middle, then
    restore unit quaternions. Endpoint frames are untouched, so the bitwise
    prefix/suffix guarantee is preserved.
    """
    out = feats.copy()
    half = n_conn // 2
    # a-side: target = last frame of a continued by one step of its velocity
    target_a = 2.0 * feats[n_a - 1] - feats[n_a - 2] if n_a >= 2 else feats[n_a - 1]
    d_a = target_a - feats[n_a]
    j_b = n_a + n_conn  # first frame of b
    target_b = 2.0 * feats[j_b] - feats[j_b + 1] if j_b + 1 < feats.shape[0] else feats[j_b]
    d_b = target_b - feats[j_b - 1]
    for k in range(half):
        w = 1.0 - k / half
        out[n_a + k] += w * d_a
        out[j_b - 1 - k] += w * d_b
    out[n_a : j_b] = renormalize_quat_columns(out[n_a : j_b])
    return out
