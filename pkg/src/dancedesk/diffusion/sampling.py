"""Ancestral sampler, mask-overwrite inpainting, and re-diffusion restyling."""
import threading

import numpy as np
import torch

from ..errors import CapExceeded, NoOpEdit, RangeError, ShapeError, UnknownStyle
from ..text import PromptEmbedding
from .model import STYLE_INDEX
from .tensor import FEATURES, renormalize_quat_columns
from .weights import ModelWeights

DEFAULT_GUIDANCE = 2.5
DEFAULT_T_EDIT = 50
X0_CLAMP = 8.0
MAX_GEN_FRAMES = 200


def _style_index(style_name) -> int:
    if style_name is None:
        return 0
    if style_name not in STYLE_INDEX:
        raise UnknownStyle(f"unknown style: {style_name!r}")
    return STYLE_INDEX[style_name]


class DiffusionEngine:
    """Read-only sampling facade over one loaded weight set.

    All samplers are pure functions of (weights, inputs, seed); concurrent
    calls may share one engine. The activity counter exists so tests can
    verify that callers serialize inference.
    """

    def __init__(self, weights: ModelWeights):
        self.weights = weights
        self.config = weights.config
        self.model = weights.build_model()
        self.schedule = weights.schedule()
        self.norm = weights.normalizer()
        self._counter_lock = threading.Lock()
        self._active = 0
        self.max_concurrent_inferences = 0

    # -- instrumentation -------------------------------------------------
    def _enter(self):
        with self._counter_lock:
            self._active += 1
            self.max_concurrent_inferences = max(self.max_concurrent_inferences, self._active)

    def _exit(self):
        with self._counter_lock:
            self._active -= 1

    # -- core loop --------------------------------------------------------
    def _denoise(self, x, t_start, emb, style_idx, guidance_w, gen, known=None, src_norm=None, gen_known=None):
        """Run ancestral denoising from t_start down to 0 on x (1, F, feat)."""
        sched = self.schedule
        ab = sched.alpha_bars
        prompt = torch.from_numpy(np.tile(emb.values.astype(np.float32), (2, 1)))
        styles = torch.tensor([style_idx, 0], dtype=torch.long)
        null_mask = torch.tensor([False, True])

        if known is not None:
            fwd = lambda t: torch.from_numpy(
                sched.forward_diffuse(src_norm, t, torch.randn(src_norm.shape, generator=gen_known).numpy())
                .astype(np.float32)
            )
            x = torch.where(known, fwd(t_start), x)

        with torch.no_grad():
            for t in range(t_start, 0, -1):
                t2 = torch.tensor([t, t], dtype=torch.long)
                pred = self.model(x.expand(2, -1, -1), t2, prompt, styles, null_mask=null_mask)
                x0 = (1.0 + guidance_w) * pred[0:1] - guidance_w * pred[1:2]
                x0 = torch.clamp(x0, -X0_CLAMP, X0_CLAMP)
                if t > 1:
                    coef_x0 = np.sqrt(ab[t - 1]) * sched.betas[t] / (1.0 - ab[t])
                    coef_xt = np.sqrt(sched.alphas[t]) * (1.0 - ab[t - 1]) / (1.0 - ab[t])
                    sigma = np.sqrt(sched.betas[t] * (1.0 - ab[t - 1]) / (1.0 - ab[t]))
                    z = torch.randn(x.shape, generator=gen)
                    x = float(coef_x0) * x0 + float(coef_xt) * x + float(sigma) * z
                else:
                    x = x0
                if known is not None:
                    x = torch.where(known, fwd(t - 1), x)
        return x

    def _finish(self, x) -> np.ndarray:
        out = self.norm.denormalize(x[0].numpy().astype(np.float64))
        return renormalize_quat_columns(out)

    def _draft_init(self, n_frames, emb, style_idx, guidance_w, gen):
        """Informed chain start. The schedule's terminal step keeps ~60% of
        the signal (alpha_bar_T ~ 0.37), so initializing from N(0, 1) leaves
        the model reading phantom signal out of pure noise. Instead: predict
        a draft x0 from pure noise at t=T (the denoiser is trained on that
        input, see training.PURE_NOISE_P), then draw x_T from the forward
        process around the draft."""
        t_steps = self.schedule.t_steps
        z = torch.randn((1, n_frames, FEATURES), generator=gen)
        prompt = torch.from_numpy(np.tile(emb.values.astype(np.float32), (2, 1)))
        styles = torch.tensor([style_idx, 0], dtype=torch.long)
        null_mask = torch.tensor([False, True])
        with torch.no_grad():
            pred = self.model(z.expand(2, -1, -1), torch.tensor([t_steps, t_steps]),
                              prompt, styles, null_mask=null_mask)
        x0 = (1.0 + guidance_w) * pred[0:1] - guidance_w * pred[1:2]
        x0 = torch.clamp(x0, -X0_CLAMP, X0_CLAMP)
        ab = self.schedule.alpha_bars[t_steps]
        noise = torch.randn((1, n_frames, FEATURES), generator=gen)
        return float(np.sqrt(ab)) * x0 + float(np.sqrt(1.0 - ab)) * noise

    # -- public samplers ---------------------------------------------------
    def sample(self, embedding: PromptEmbedding, style_name, n_frames: int,
               guidance_w: float = DEFAULT_GUIDANCE, seed: int = 0) -> np.ndarray:
        """Generate (n_frames, 91) de-normalized motion features."""
        if not 1 <= n_frames <= MAX_GEN_FRAMES:
            raise RangeError(f"n_frames must be in [1, {MAX_GEN_FRAMES}], got {n_frames}")
        style_idx = _style_index(style_name)
        self._enter()
        try:
            gen = torch.Generator().manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
            x = self._draft_init(n_frames, embedding, style_idx, guidance_w, gen)
            x = self._denoise(x, self.schedule.t_steps, embedding, style_idx, guidance_w, gen)
            return self._finish(x)
        finally:
            self._exit()

    def sample_inpaint(self, source: np.ndarray, known: np.ndarray, embedding: PromptEmbedding,
                       style_name=None, guidance_w: float = DEFAULT_GUIDANCE, seed: int = 0) -> np.ndarray:
        """Sample while overwriting known entries from the forward-diffused
        source each step; known entries of the result equal `source` bitwise."""
        source = np.asarray(source, dtype=np.float64)
        known = np.asarray(known, dtype=bool)
        if source.ndim != 2 or source.shape[1] != FEATURES:
            raise ShapeError(f"source must be (frames, {FEATURES})")
        if known.shape != source.shape:
            raise ShapeError(f"mask shape {known.shape} != source shape {source.shape}")
        if source.shape[0] > self.config.max_frames:
            raise CapExceeded(f"{source.shape[0]} frames exceeds the {self.config.max_frames}-frame limit")
        if bool(np.all(known)):
            raise NoOpEdit("fully-known mask: nothing to synthesize")
        style_idx = _style_index(style_name)
        self._enter()
        try:
            base_seed = seed & 0x7FFFFFFFFFFFFFFF
            gen = torch.Generator().manual_seed(base_seed)
            gen_known = torch.Generator().manual_seed(base_seed ^ 0x1A5F0F0F0F0F0F0F)
            src_norm = self.norm.normalize(source)
            known_t = torch.from_numpy(known[None])
            x = self._draft_init(source.shape[0], embedding, style_idx, guidance_w, gen)
            x = self._denoise(x, self.schedule.t_steps, embedding, style_idx, guidance_w, gen,
                              known=known_t, src_norm=src_norm[None], gen_known=gen_known)
            out = self._finish(x)
            out[known] = source[known]
            return out
        finally:
            self._exit()

    def restyle(self, source: np.ndarray, embedding: PromptEmbedding, style_name: str,
                t_edit: int = DEFAULT_T_EDIT, guidance_w: float = DEFAULT_GUIDANCE,
                seed: int = 0) -> np.ndarray:
        """Forward-diffuse source to t_edit, then denoise under the style."""
        if style_name not in STYLE_INDEX:
            raise UnknownStyle(f"unknown style: {style_name!r}")
        if not 0 <= t_edit <= self.schedule.t_steps:
            raise RangeError(f"t_edit must be in [0, {self.schedule.t_steps}]")
        source = np.asarray(source, dtype=np.float64)
        if source.ndim != 2 or source.shape[1] != FEATURES:
            raise ShapeError(f"source must be (frames, {FEATURES})")
        if source.shape[0] > self.config.max_frames:
            raise CapExceeded(f"{source.shape[0]} frames exceeds the {self.config.max_frames}-frame limit")
        if t_edit == 0:
            return source.copy()
        self._enter()
        try:
            gen = torch.Generator().manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
            src_norm = self.norm.normalize(source).astype(np.float32)
            noise = torch.randn((1,) + src_norm.shape, generator=gen)
            x = torch.from_numpy(
                self.schedule.forward_diffuse(src_norm[None].astype(np.float64), t_edit, noise.numpy().astype(np.float64))
                .astype(np.float32)
            )
            x = self._denoise(x, t_edit, embedding, STYLE_INDEX[style_name], guidance_w, gen)
            return self._finish(x)
        finally:
            self._exit()
