import numpy as np
import pytest

from dancedesk import quat
from dancedesk.motion import MotionClip, Provenance, make_clip
from dancedesk.skeleton import N_JOINTS, default_skeleton


@pytest.fixture(scope="session")
def skeleton():
    return default_skeleton()


def random_quats(rng, shape):
    q = rng.standard_normal(shape + (4,))
    return quat.canonicalize(q)


def random_clip(rng, n_frames=30, kind="generated", prompts=("test",)):
    root = rng.standard_normal((n_frames, 3)) * 0.3
    quats = random_quats(rng, (n_frames, N_JOINTS))
    return make_clip(root, quats, Provenance(kind=kind, prompts=prompts))


def constant_clip(n_frames=10):
    root = np.tile([0.0, 0.95, 0.0], (n_frames, 1))
    quats = np.zeros((n_frames, N_JOINTS, 4))
    quats[..., 0] = 1.0
    return MotionClip(root=root, quats=quats, provenance=Provenance(kind="generated"))
