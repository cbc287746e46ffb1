from .model import STYLE_INDEX, Denoiser, DenoiserConfig, build_denoiser
from .sampling import DEFAULT_GUIDANCE, DEFAULT_T_EDIT, MAX_GEN_FRAMES, DiffusionEngine
from .schedule import NoiseSchedule, forward_diffuse
from .tensor import (
    FEATURES,
    Normalizer,
    clip_to_features,
    expand_mask,
    features_to_clip,
    renormalize_quat_columns,
)
from .training import train
from .weights import ModelWeights, from_model, load_weights, save_weights

__all__ = [
    "STYLE_INDEX",
    "Denoiser",
    "DenoiserConfig",
    "build_denoiser",
    "DEFAULT_GUIDANCE",
    "DEFAULT_T_EDIT",
    "MAX_GEN_FRAMES",
    "DiffusionEngine",
    "NoiseSchedule",
    "forward_diffuse",
    "FEATURES",
    "Normalizer",
    "clip_to_features",
    "expand_mask",
    "features_to_clip",
    "renormalize_quat_columns",
    "ModelWeights",
    "from_model",
    "load_weights",
    "save_weights",
    "train",
]
