"""Weight file: one .npz holding config hash, schedule, normalization, params."""
import json
from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import WeightsError
from .model import Denoiser, DenoiserConfig
from .schedule import NoiseSchedule
from .tensor import Normalizer


@dataclass
class ModelWeights:
    config: DenoiserConfig
    params: dict  # name -> float32 ndarray
    norm_mean: np.ndarray
    norm_std: np.ndarray
    loss_trace: list = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        return self.config.hash()

    def schedule(self) -> NoiseSchedule:
        return NoiseSchedule(t_steps=self.config.t_steps)

    def normalizer(self) -> Normalizer:
        return Normalizer(self.norm_mean, self.norm_std)

    def build_model(self) -> Denoiser:
        model = Denoiser(self.config)
        state = {k: torch.from_numpy(np.ascontiguousarray(v)) for k, v in self.params.items()}
        model.load_state_dict(state)
        model.eval()
        return model


def from_model(model: Denoiser, norm: Normalizer, loss_trace=None) -> ModelWeights:
    params = {k: v.detach().cpu().numpy().copy() for k, v in model.state_dict().items()}
    return ModelWeights(
        config=model.config,
        params=params,
        norm_mean=norm.mean.copy(),
        norm_std=norm.std.copy(),
        loss_trace=list(loss_trace or []),
    )


def save_weights(weights: ModelWeights, path) -> None:
    sched = weights.schedule()
    arrays = {f"param/{k}": v for k, v in weights.params.items()}
    np.savez_compressed(
        path,
        config_json=np.frombuffer(json.dumps(
            {"config": weights.config.__dict__, "hash": weights.config_hash}).encode(), dtype=np.uint8),
        norm_mean=weights.norm_mean,
        norm_std=weights.norm_std,
        betas=sched.betas,
        loss_trace=np.asarray(weights.loss_trace, dtype=np.float64),
        **arrays,
    )


def load_weights(path) -> ModelWeights:
    try:
        data = np.load(path)
    except Exception as exc:
        raise WeightsError(f"cannot read weights file: {exc}") from exc
    try:
        header = json.loads(bytes(data["config_json"]).decode())
        config = DenoiserConfig(**header["config"])
    except (KeyError, ValueError, TypeError) as exc:
        raise WeightsError(f"malformed weights header: {exc}") from exc
    if config.hash() != header.get("hash"):
        raise WeightsError("config hash mismatch: weights file does not match its declared config")
    params = {k[len("param/"):]: data[k] for k in data.files if k.startswith("param/")}
    return ModelWeights(
        config=config,
        params=params,
        norm_mean=data["norm_mean"],
        norm_std=data["norm_std"],
        loss_trace=data["loss_trace"].tolist(),
    )
