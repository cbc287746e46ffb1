"""Motion feature tensors: frames x 91 (root xyz + 22 wxyz quaternions)."""
import numpy as np

from .. import quat
from ..motion import BodyPartMask, MotionClip, Provenance
from ..skeleton import N_JOINTS

FEATURES = 3 + 4 * N_JOINTS  # 91


def clip_to_features(clip: MotionClip) -> np.ndarray:
    x = np.empty((clip.n_frames, FEATURES), dtype=np.float64)
    x[:, :3] = clip.root
    x[:, 3:] = clip.quats.reshape(clip.n_frames, -1)
    return x


def features_to_clip(x: np.ndarray, provenance: Provenance) -> MotionClip:
    """Convert features back to a clip.

    Quaternions are taken verbatim (sampler outputs are already unit and
    edits rely on bitwise preservation); callers with raw data should use
    renormalize_quat_columns or motion.make_clip first.
    """
    root = np.array(x[:, :3])
    quats = np.array(x[:, 3:]).reshape(-1, N_JOINTS, 4)
    return MotionClip(root=root, quats=quats, provenance=provenance)


def renormalize_quat_columns(x: np.ndarray) -> np.ndarray:
    """Canonical unit quaternions in feature space; root columns untouched."""
    out = x.copy()
    q = out[:, 3:].reshape(x.shape[0], N_JOINTS, 4)
    out[:, 3:] = quat.canonicalize(q).reshape(x.shape[0], -1)
    return out


def expand_mask(mask: BodyPartMask) -> np.ndarray:
    """BodyPartMask -> (frames, 91) boolean known matrix.

    A known joint marks all 4 of its quaternion columns; root_known marks
    the 3 translation columns.
    """
    n = mask.known.shape[0]
    known = np.empty((n, FEATURES), dtype=bool)
    known[:, :3] = mask.root_known[:, None]
    known[:, 3:] = np.repeat(mask.known, 4, axis=1)
    return known


class Normalizer:
    """Per-column mean/std frozen from the training corpus."""

    STD_FLOOR = 1e-2

    def __init__(self, mean: np.ndarray, std: np.ndarray):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.std = np.maximum(np.asarray(std, dtype=np.float64), self.STD_FLOOR)

    @classmethod
    def fit(cls, feature_arrays) -> "Normalizer":
        stacked = np.concatenate(list(feature_arrays), axis=0)
        return cls(stacked.mean(axis=0), stacked.std(axis=0))

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def denormalize(self, x: np.ndarray) -> np.ndarray:
        return x * self.std + self.mean
