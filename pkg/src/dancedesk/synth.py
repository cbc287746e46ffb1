"""Procedural dance corpus: 8 separable pseudo-genres, 6 style modifiers.

Clips are sums of per-joint sinusoidal rotations with seeded phase jitter.
Each genre has a distinct (dominant group, dominant frequency) signature so
a frequency/amplitude probe can tell them apart; each style monotonically
moves one measurable statistic.
"""
from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import RangeError, UnknownStyle
from .motion import FPS, MotionClip, Provenance, make_clip
from .skeleton import N_JOINTS

# Oscillation weight per joint within each animated group. spine1 (joint 3)
# is reserved for the style pitch channel and never oscillates.
ARM_OSC = {13: 0.2, 14: 0.2, 16: 1.0, 17: 1.0, 18: 0.7, 19: 0.7, 20: 0.4, 21: 0.4}
LEG_OSC = {1: 1.0, 2: 1.0, 4: 0.7, 5: 0.7, 7: 0.4, 8: 0.4, 10: 0.2, 11: 0.2}
SPINE_OSC = {6: 1.0, 9: 0.8, 12: 0.5, 15: 0.3}
RIGHT_SIDE = {2, 5, 8, 11, 14, 17, 19, 21}
# chain depth used by genres that ripple phase along the arm
ARM_CHAIN_DEPTH = {13: 0, 14: 0, 16: 1, 17: 1, 18: 2, 19: 2, 20: 3, 21: 3}

AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
ARM_AXIS = "z"
LEG_AXIS = "x"

REST_ROOT_Y = 0.95
ROOT_BOUNCE_AMP = 0.04
ROOT_SWAY_AMP = 0.03
LINEAR_SPEED = 0.25  # m/s
CIRCLE_RADIUS = 0.5  # m
CIRCLE_HZ = 0.1
PHASE_JITTER = 0.5  # rad, uniform +/-


@dataclass(frozen=True)
class GenreSpec:
    """Oscillation recipe for one pseudo-genre.

    Each body group gets (frequency Hz, amplitude rad, phase offset rad).
    """

    name: str
    arms: tuple
    legs: tuple
    spine: tuple
    spine_axis: str
    root_pattern: str  # in_place | linear | circular
    dominant_group: str
    alternate: bool = False  # pi phase offset on right-side limbs
    chain_phase: float = 0.0  # extra phase per arm-chain link


GENRES = {
    g.name: g
    for g in (
        GenreSpec("bounce", arms=(1.0, 0.3, 0.0), legs=(2.0, 0.5, 0.0), spine=(2.0, 0.1, 0.0),
                  spine_axis="x", root_pattern="in_place", dominant_group="legs"),
        GenreSpec("sway", arms=(0.5, 0.4, 0.0), legs=(0.5, 0.15, 0.0), spine=(0.5, 0.5, 0.0),
                  spine_axis="z", root_pattern="in_place", dominant_group="spine"),
        GenreSpec("spin", arms=(0.75, 0.6, 0.0), legs=(0.75, 0.2, 0.0), spine=(0.75, 0.15, 0.0),
                  spine_axis="y", root_pattern="circular", dominant_group="arms", alternate=True),
        GenreSpec("wave", arms=(1.5, 0.8, 0.0), legs=(0.5, 0.1, 0.0), spine=(0.5, 0.2, 0.0),
                  spine_axis="x", root_pattern="in_place", dominant_group="arms", chain_phase=0.9),
        GenreSpec("march", arms=(1.25, 0.5, 0.0), legs=(1.25, 0.7, 0.0), spine=(1.25, 0.05, 0.0),
                  spine_axis="x", root_pattern="linear", dominant_group="legs", alternate=True),
        GenreSpec("kick", arms=(0.25, 0.2, 0.0), legs=(0.75, 0.9, 0.0), spine=(0.25, 0.1, 0.0),
                  spine_axis="x", root_pattern="in_place", dominant_group="legs", alternate=True),
        GenreSpec("twist", arms=(1.0, 0.4, 0.0), legs=(1.0, 0.1, 0.0), spine=(1.0, 0.6, 0.0),
                  spine_axis="y", root_pattern="in_place", dominant_group="spine", alternate=True),
        GenreSpec("reach", arms=(0.5, 1.0, 0.0), legs=(0.25, 0.1, 0.0), spine=(0.25, 0.2, 0.0),
                  spine_axis="x", root_pattern="in_place", dominant_group="arms"),
    )
}
GENRE_NAMES = tuple(GENRES)


@dataclass(frozen=True)
class StyleSpec:
    name: str
    amplitude_scale: float
    tempo_scale: float
    spine_pitch_offset: float
    root_bounce_scale: float
    root_sway_scale: float
    arm_raise_offset: float = 0.0


STYLES = {
    s.name: s
    for s in (
        StyleSpec("angry", 1.5, 1.3, 0.0, 1.0, 1.0),
        StyleSpec("childlike", 1.0, 1.5, 0.0, 1.6, 1.0),
        StyleSpec("depressed", 0.6, 0.8, -0.3, 1.0, 1.0),
        StyleSpec("happy", 1.2, 1.0, 0.0, 1.3, 1.0),
        StyleSpec("proud", 1.0, 1.0, 0.2, 1.0, 1.0, arm_raise_offset=0.3),
        StyleSpec("strutting", 1.0, 1.1, 0.0, 1.0, 1.5),
    )
}
STYLE_NAMES = tuple(STYLES)

# The single statistic each style is expected to move, and the direction.
STYLE_CHANNEL = {
    "angry": ("amplitude", +1),
    "childlike": ("tempo", +1),
    "depressed": ("amplitude", -1),
    "happy": ("amplitude", +1),
    "proud": ("spine_pitch", +1),
    "strutting": ("root_lateral", +1),
}


@dataclass(frozen=True)
class DatasetManifest:
    clips_per_genre: int
    duration_s: float = 10.0
    seed: int = 0
    style_fraction: float = 0.5

    def __post_init__(self):
        if self.clips_per_genre < 1:
            raise ValueError("clips_per_genre must be >= 1")
        if not 0 < self.duration_s <= 10:
            raise ValueError("duration must be in (0, 10] s")
        if not 0.0 <= self.style_fraction <= 1.0:
            raise ValueError("style_fraction must be in [0, 1]")


def _genre(genre) -> GenreSpec:
    if isinstance(genre, GenreSpec):
        return genre
    if genre not in GENRES:
        raise ValueError(f"unknown genre: {genre!r}")
    return GENRES[genre]


def _style(style) -> StyleSpec | None:
    if style is None or isinstance(style, StyleSpec):
        return style
    if style not in STYLES:
        raise UnknownStyle(f"unknown style: {style!r}")
    return STYLES[style]


def caption_for(genre_name: str, style_name: str | None) -> str:
    text = f"A person is dancing {genre_name}"
    if style_name:
        text += f" in a {style_name} way"
    return text


def joint_tracks(genre, style, duration_s: float, seed: int):
    """Analytic per-joint (axis, angle-over-time) tracks plus root trajectory.

    Returned angles are exact sinusoid evaluations; generate_clip converts
    them to quaternions. Exposed so tests can regress against the closed
    form without round-tripping rotations.
    """
    g = _genre(genre)
    s = _style(style)
    n = int(round(duration_s * FPS))
    t = np.arange(n) / FPS

    amp_scale = s.amplitude_scale if s else 1.0
    tempo = s.tempo_scale if s else 1.0
    genre_idx = GENRE_NAMES.index(g.name)
    # jitter depends on (seed, genre) only, so a styled clip shares phases
    # with its neutral counterpart at the same seed
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, genre_idx])
    jitter = rng.uniform(-PHASE_JITTER, PHASE_JITTER, N_JOINTS)

    tracks = {}  # joint -> (axis unit 3-vector, angles (n,))
    for group_name, osc, axis_name in (
        ("arms", ARM_OSC, ARM_AXIS),
        ("legs", LEG_OSC, LEG_AXIS),
        ("spine", SPINE_OSC, g.spine_axis),
    ):
        freq, amp, phase0 = getattr(g, group_name)
        axis = np.array(AXES[axis_name])
        for j, weight in osc.items():
            phase = phase0 + jitter[j]
            if g.alternate and j in RIGHT_SIDE:
                phase += np.pi
            if group_name == "arms" and g.chain_phase:
                phase += g.chain_phase * ARM_CHAIN_DEPTH[j]
            offset = 0.0
            if s and group_name == "arms" and j in (16, 17):
                offset = s.arm_raise_offset
            angles = offset + amp_scale * amp * weight * np.sin(2 * np.pi * freq * tempo * t + phase)
            tracks[j] = (axis, angles)
    # style pitch channel: constant spine1 pitch about x
    pitch = s.spine_pitch_offset if s else 0.0
    tracks[3] = (np.array(AXES["x"]), np.full(n, pitch))

    dom_freq = getattr(g, g.dominant_group)[0] * tempo
    bounce = ROOT_BOUNCE_AMP * (s.root_bounce_scale if s else 1.0)
    sway = ROOT_SWAY_AMP * (s.root_sway_scale if s else 1.0)
    root = np.zeros((n, 3))
    root[:, 1] = REST_ROOT_Y + bounce * np.sin(2 * np.pi * dom_freq * t + jitter[0])
    if g.root_pattern == "in_place":
        root[:, 0] = sway * np.sin(np.pi * dom_freq * t + jitter[1])
    elif g.root_pattern == "linear":
        root[:, 0] = sway * np.sin(np.pi * dom_freq * t + jitter[1])
        root[:, 2] = LINEAR_SPEED * tempo * t
    elif g.root_pattern == "circular":
        theta = 2 * np.pi * CIRCLE_HZ * tempo * t + jitter[1]
        root[:, 0] = CIRCLE_RADIUS * np.cos(theta)
        root[:, 2] = CIRCLE_RADIUS * np.sin(theta)
    else:
        raise ValueError(f"unknown root pattern: {g.root_pattern}")
    return tracks, root


def generate_clip(genre, style, duration_s: float, seed: int):
    """Build one labeled clip; returns (MotionClip, caption)."""
    if not 1 <= duration_s <= 10:
        raise RangeError(f"duration must be in [1, 10] s, got {duration_s}")
    g = _genre(genre)
    s = _style(style)
    tracks, root = joint_tracks(g, s, duration_s, seed)
    n = root.shape[0]
    quats = np.zeros((n, N_JOINTS, 4))
    quats[..., 0] = 1.0
    for j, (axis, angles) in tracks.items():
        quats[:, j] = quat.from_axis_angle(axis, angles)
    caption = caption_for(g.name, s.name if s else None)
    clip = make_clip(root, quats, Provenance(kind="generated", prompts=(caption,), style=s.name if s else None))
    return clip, caption


def build_dataset(manifest: DatasetManifest):
    """Deterministic corpus: 8 x clips_per_genre (clip, caption) pairs.

    A seeded selection styles exactly round(total * style_fraction) clips.
    Order is (genre index, clip index) regardless of execution strategy.
    """
    total = len(GENRE_NAMES) * manifest.clips_per_genre
    n_styled = int(round(total * manifest.style_fraction))
    sel_rng = np.random.default_rng([manifest.seed & 0xFFFFFFFFFFFFFFFF, 0xDA7A])
    styled_idx = set(sel_rng.choice(total, size=n_styled, replace=False).tolist())
    style_assign = sel_rng.integers(0, len(STYLE_NAMES), size=total)

    out = []
    k = 0
    for gi, genre_name in enumerate(GENRE_NAMES):
        for ci in range(manifest.clips_per_genre):
            style = STYLE_NAMES[style_assign[k]] if k in styled_idx else None
            seed = (manifest.seed * 1_000_003 + gi * 131_071 + ci) & 0x7FFFFFFFFFFFFFFF
            out.append(generate_clip(genre_name, style, manifest.duration_s, seed))
            k += 1
    return out


# ---------------------------------------------------------------------------
# Style statistics
# ---------------------------------------------------------------------------

def _rotvecs(clip: MotionClip) -> np.ndarray:
    return quat.to_rotvec(clip.quats)  # (frames, 22, 3)


def amplitude_stat(clip: MotionClip) -> float:
    """Mean joint-angle deviation: E_fj ||rotvec - per-joint time mean||."""
    rv = _rotvecs(clip)
    dev = rv - rv.mean(axis=0, keepdims=True)
    return float(np.mean(np.linalg.norm(dev, axis=-1)))


def tempo_stat(clip: MotionClip) -> float:
    """Dominant oscillation frequency (Hz) across all joint-angle channels."""
    rv = _rotvecs(clip).reshape(clip.n_frames, -1)
    rv = rv - rv.mean(axis=0, keepdims=True)
    spec = np.abs(np.fft.rfft(rv, axis=0)) ** 2
    power = spec.sum(axis=1)
    power[0] = 0.0
    freqs = np.fft.rfftfreq(clip.n_frames, d=1.0 / FPS)
    return float(freqs[int(np.argmax(power))])


def spine_pitch_stat(clip: MotionClip) -> float:
    """Mean pitch (x rot-vector component, rad) of the lowest spine joint."""
    return float(np.mean(quat.to_rotvec(clip.quats[:, 3])[:, 0]))


def root_vertical_rms(clip: MotionClip) -> float:
    y = clip.root[:, 1]
    return float(np.sqrt(np.mean((y - y.mean()) ** 2)))


def root_lateral_rms(clip: MotionClip) -> float:
    """RMS lateral (x) oscillation about a linear drift fit."""
    x = clip.root[:, 0]
    t = np.arange(clip.n_frames, dtype=np.float64)
    coeffs = np.polyfit(t, x, 1) if clip.n_frames > 1 else (0.0, x[0])
    resid = x - np.polyval(coeffs, t)
    return float(np.sqrt(np.mean(resid**2)))


_STAT_FNS = {
    "amplitude": amplitude_stat,
    "tempo": tempo_stat,
    "spine_pitch": spine_pitch_stat,
    "root_vertical": root_vertical_rms,
    "root_lateral": root_lateral_rms,
}


def style_statistic(clip: MotionClip, style_name: str) -> float:
    """The statistic the named style is designed to move."""
    if clip.n_frames < 1:
        raise ValueError("empty clip")
    if style_name not in STYLE_CHANNEL:
        raise UnknownStyle(f"unknown style: {style_name!r}")
    channel, _ = STYLE_CHANNEL[style_name]
    return _STAT_FNS[channel](clip)


def style_direction(style_name: str) -> int:
    if style_name not in STYLE_CHANNEL:
        raise UnknownStyle(f"unknown style: {style_name!r}")
    return STYLE_CHANNEL[style_name][1]
