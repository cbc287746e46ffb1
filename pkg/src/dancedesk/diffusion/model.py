"""Transformer-style x0-prediction denoiser."""
import hashlib
import json
import math
from dataclasses import asdict, dataclass

import torch
import torch.nn as nn

from ..synth import STYLE_NAMES
from .tensor import FEATURES

NULL_STYLE = 0  # style token table: 0 = neutral, 1..6 = the named styles
STYLE_INDEX = {name: i + 1 for i, name in enumerate(STYLE_NAMES)}


@dataclass(frozen=True)
class DenoiserConfig:
    layers: int = 4
    width: int = 128
    heads: int = 4
    embed_dim: int = 64
    n_styles: int = 1 + len(STYLE_NAMES)
    max_frames: int = 450
    features: int = FEATURES
    ffn_mult: int = 2
    t_steps: int = 100

    def hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def sinusoidal_table(length: int, dim: int) -> torch.Tensor:
    pos = torch.arange(length, dtype=torch.float32)[:, None]
    i = torch.arange(dim // 2, dtype=torch.float32)[None, :]
    angles = pos / torch.pow(10000.0, 2.0 * i / dim)
    table = torch.zeros(length, dim)
    table[:, 0::2] = torch.sin(angles)
    table[:, 1::2] = torch.cos(angles)
    return table


class Block(nn.Module):
    def __init__(self, width: int, heads: int, ffn_mult: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(width)
        self.attn = nn.MultiheadAttention(width, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(width)
        self.ffn = nn.Sequential(
            nn.Linear(width, width * ffn_mult), nn.GELU(), nn.Linear(width * ffn_mult, width)
        )

    def forward(self, h, key_padding_mask=None):
        z = self.norm1(h)
        attn_out, _ = self.attn(z, z, z, key_padding_mask=key_padding_mask, need_weights=False)
        h = h + attn_out
        return h + self.ffn(self.norm2(h))


class Denoiser(nn.Module):
    """Predicts the clean motion tensor from (x_t, t, prompt, style)."""

    def __init__(self, config: DenoiserConfig):
        super().__init__()
        self.config = config
        w = config.width
        self.in_proj = nn.Linear(config.features, w)
        # learned positional table, sinusoidal init so untrained tail
        # positions still carry ordered structure
        self.pos = nn.Parameter(sinusoidal_table(config.max_frames, w))
        self.prompt_proj = nn.Linear(config.embed_dim, w)
        self.null_prompt = nn.Parameter(torch.zeros(w))
        self.style_emb = nn.Embedding(config.n_styles, w)
        self.time_mlp = nn.Sequential(nn.Linear(w, w), nn.SiLU(), nn.Linear(w, w))
        self.blocks = nn.ModuleList(Block(w, config.heads, config.ffn_mult) for _ in range(config.layers))
        self.out_norm = nn.LayerNorm(w)
        self.out_proj = nn.Linear(w, config.features)
        self.register_buffer("time_table", sinusoidal_table(config.t_steps + 1, w), persistent=False)

    def forward(self, x, t, prompt, style_idx, null_mask=None, key_padding_mask=None):
        """x: (B, F, features); t: (B,) long; prompt: (B, embed_dim);
        style_idx: (B,) long; null_mask: (B,) bool dropping the condition;
        key_padding_mask: (B, F) bool, True marks padding."""
        n_frames = x.shape[1]
        if n_frames > self.config.max_frames:
            raise ValueError(f"sequence length {n_frames} exceeds {self.config.max_frames}")
        cond_prompt = self.prompt_proj(prompt)
        style = style_idx
        if null_mask is not None:
            cond_prompt = torch.where(null_mask[:, None], self.null_prompt[None, :], cond_prompt)
            style = torch.where(null_mask, torch.zeros_like(style), style)
        cond = cond_prompt + self.style_emb(style) + self.time_mlp(self.time_table[t])
        h = self.in_proj(x) + self.pos[None, :n_frames] + cond[:, None, :]
        for block in self.blocks:
            h = block(h, key_padding_mask=key_padding_mask)
        return self.out_proj(self.out_norm(h))


def build_denoiser(config: DenoiserConfig, init_seed: int = 0) -> Denoiser:
    torch.manual_seed(init_seed)
    return Denoiser(config)
