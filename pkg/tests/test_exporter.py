import json
import sys

import numpy as np
import pytest

from dancedesk.errors import (
    CameraError,
    EmptyClip,
    EncoderFailed,
    NotConfigured,
    ParseError,
    SchemaError,
)
from dancedesk.exporter.gltf import export_gltf
from dancedesk.exporter.ingest import INTERCHANGE_V1, import_motion
from dancedesk.exporter.render import (
    Camera,
    camera_basis,
    project_points,
    render_frames,
    render_thumbnail,
    render_to_dir,
)
from dancedesk.exporter.video import ENV_VAR, encode_video
from dancedesk.motion import MotionClip, clip_to_document
from dancedesk.skeleton import JOINT_NAMES, N_JOINTS
from tests.conftest import constant_clip, random_clip
from tests.gltf_validator import animation_tracks, validate_gltf


# ---------------------------------------------------------------------------
# glTF export
# ---------------------------------------------------------------------------

def test_gltf_validates_and_has_expected_structure(skeleton):
    clip = random_clip(np.random.default_rng(0), n_frames=17)
    doc = validate_gltf(export_gltf(clip))

    assert len(doc["nodes"]) == N_JOINTS
    assert [n["name"] for n in doc["nodes"]] == list(JOINT_NAMES)
    anim = doc["animations"][0]
    assert len(anim["channels"]) == N_JOINTS + 1  # 22 rotations + root translation
    paths = [c["target"]["path"] for c in anim["channels"]]
    assert paths.count("translation") == 1
    assert paths.count("rotation") == N_JOINTS
    assert all(s["interpolation"] == "LINEAR" for s in anim["samplers"])


def test_gltf_node_tree_matches_skeleton(skeleton):
    clip = random_clip(np.random.default_rng(1), n_frames=2)
    doc = validate_gltf(export_gltf(clip))
    parents = [-1] * N_JOINTS
    for i, node in enumerate(doc["nodes"]):
        for c in node.get("children", []):
            parents[c] = i
    assert tuple(parents) == skeleton.parents
    for i, node in enumerate(doc["nodes"]):
        np.testing.assert_allclose(node["translation"], skeleton.offsets[i], atol=1e-7)


def test_gltf_timestamps_exact_float32():
    clip = random_clip(np.random.default_rng(2), n_frames=23)
    doc = validate_gltf(export_gltf(clip))
    times, _, _ = animation_tracks(doc)
    expected = [float(np.float32(i) / np.float32(20.0)) for i in range(23)]
    assert times == expected


def test_gltf_round_trip_rotation_and_translation():
    clip = random_clip(np.random.default_rng(3), n_frames=11)
    doc = validate_gltf(export_gltf(clip))
    _, translations, rotations = animation_tracks(doc)
    assert len(rotations) == N_JOINTS

    np.testing.assert_allclose(np.array(translations), clip.root, atol=1e-6)
    for j in range(N_JOINTS):
        got = np.array(rotations[j])  # xyzw
        want = clip.quats[:, j][:, [1, 2, 3, 0]]
        np.testing.assert_allclose(got, want, atol=1e-5)
        np.testing.assert_allclose(np.linalg.norm(got, axis=-1), 1.0, atol=1e-5)


def test_gltf_empty_clip_rejected():
    # zero-frame clips are rejected at construction, so the exporter's
    # EmptyClip guard can only trip on a truncated stand-in
    clip = constant_clip(1)
    with pytest.raises(ValueError):
        MotionClip(root=clip.root[:0], quats=clip.quats[:0], provenance=clip.provenance)

    class Truncated:
        n_frames = 0

    with pytest.raises(EmptyClip):
        export_gltf(Truncated())


# ---------------------------------------------------------------------------
# pinhole rendering
# ---------------------------------------------------------------------------

def test_projection_matches_hand_computation():
    # Camera on +z axis looking at the origin: forward=(0,0,-1), right=(1,0,0).
    cam = Camera(position=(0.0, 0.0, 3.0), look_at=(0.0, 0.0, 0.0), vertical_fov_deg=60.0)
    size = (640, 480)
    focal = (size[1] / 2.0) / np.tan(np.radians(30.0))
    pts = np.array([
        [0.0, 0.0, 0.0],    # on the optical axis
        [0.3, 0.0, 0.0],    # right of center
        [0.0, 0.2, 1.0],    # above center, closer to the camera
    ])
    xy, depth = project_points(pts, cam, size)
    np.testing.assert_allclose(depth, [3.0, 3.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(xy[0], [320.0, 240.0], atol=1e-9)
    np.testing.assert_allclose(xy[1], [320.0 + focal * 0.3 / 3.0, 240.0], atol=1e-9)
    np.testing.assert_allclose(xy[2], [320.0, 240.0 - focal * 0.2 / 2.0], atol=1e-9)


def test_point_behind_camera_has_negative_depth():
    cam = Camera(position=(0.0, 0.0, 3.0), look_at=(0.0, 0.0, 0.0))
    _, depth = project_points(np.array([[0.0, 0.0, 5.0]]), cam)
    assert depth[0] < 0


def test_degenerate_camera_rejected():
    with pytest.raises(CameraError):
        camera_basis(Camera(position=(1.0, 2.0, 3.0), look_at=(1.0, 2.0, 3.0)))


def test_render_is_deterministic_and_nontrivial():
    clip = random_clip(np.random.default_rng(4), n_frames=2)
    a = render_frames(clip, size=(160, 120))
    b = render_frames(clip, size=(160, 120))
    assert len(a) == 2
    for ia, ib in zip(a, b):
        assert ia.tobytes() == ib.tobytes()
        assert ia.size == (160, 120)
    # the figure actually appears: some non-background pixels
    assert np.asarray(a[0]).min() < 255


def test_render_to_dir_naming(tmp_path):
    clip = constant_clip(3)
    paths = render_to_dir(clip, tmp_path / "frames", size=(80, 60))
    assert [p.split("/")[-1] for p in paths] == [
        "frame_00000.png", "frame_00001.png", "frame_00002.png",
    ]


def test_thumbnail_written(tmp_path):
    from PIL import Image

    clip = constant_clip(2)
    out = tmp_path / "thumb.png"
    render_thumbnail(clip, out)
    assert Image.open(out).size == (160, 120)


# ---------------------------------------------------------------------------
# video encoder hook
# ---------------------------------------------------------------------------

def test_encoder_unconfigured_raises_with_guidance(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    with pytest.raises(NotConfigured) as exc:
        encode_video(tmp_path, tmp_path / "out.mp4")
    assert ENV_VAR in str(exc.value)


def test_encoder_template_substitution(tmp_path, monkeypatch):
    frames = tmp_path / "frames"
    render_to_dir(constant_clip(1), frames, size=(32, 24))
    out = tmp_path / "argv.txt"
    recorder = (
        f'{sys.executable} -c '
        '"import sys, pathlib; pathlib.Path(sys.argv[-1]).write_text(chr(10).join(sys.argv[1:]))" '
        "{input_pattern} {fps} {output}"
    )
    monkeypatch.setenv(ENV_VAR, recorder)
    encode_video(frames, out)
    pattern, fps, output = out.read_text().splitlines()
    assert pattern == str(frames / "frame_%05d.png")
    assert fps == "20"
    assert output == str(out)


def test_encoder_failure_surfaces_exit_code(tmp_path):
    frames = tmp_path / "frames"
    render_to_dir(constant_clip(1), frames, size=(32, 24))
    with pytest.raises(EncoderFailed):
        encode_video(frames, tmp_path / "out.mp4", template="false")


def test_encoder_requires_frames(tmp_path):
    (tmp_path / "empty").mkdir()
    with pytest.raises(EncoderFailed):
        encode_video(tmp_path / "empty", tmp_path / "out.mp4", template="true")


# ---------------------------------------------------------------------------
# motion ingestion
# ---------------------------------------------------------------------------

def test_import_native_fps_is_exact():
    clip = random_clip(np.random.default_rng(5), n_frames=8, prompts=("uploaded",))
    doc = clip_to_document(clip)
    back = import_motion(json.dumps(doc))
    np.testing.assert_array_equal(back.root, clip.root)
    # ingestion re-canonicalizes quaternions; values agree to float epsilon
    np.testing.assert_allclose(back.quats, clip.quats, atol=1e-12)
    assert back.provenance.kind == "ingested"
    assert back.provenance.prompts == ("uploaded",)
    assert back.id != clip.id  # ingestion mints a fresh identity


def _foreign_doc(n_frames, fps):
    quats = np.zeros((N_JOINTS, 4))
    quats[:, 0] = 1.0
    return {
        "format_version": "1",
        "id": "f" * 32,
        "fps": fps,
        "joint_names": list(JOINT_NAMES),
        "frames": [
            {"root": [float(i), 0.9, 0.0], "quats": quats.tolist()} for i in range(n_frames)
        ],
        "provenance": {"kind": "generated", "prompts": []},
    }


def test_import_resamples_30fps_by_nearest_frame():
    doc = _foreign_doc(30, fps=30)
    clip = import_motion(json.dumps(doc))
    # independent oracle: n_out = round(30 * 20/30) = 20, idx_i = round(1.5 i)
    assert clip.n_frames == 20
    expected_idx = [min(int(round(i * 30 / 20)), 29) for i in range(20)]
    np.testing.assert_array_equal(clip.root[:, 0], expected_idx)


def test_import_upsamples_low_fps():
    doc = _foreign_doc(10, fps=10)
    clip = import_motion(json.dumps(doc))
    assert clip.n_frames == 20
    expected_idx = [min(int(round(i * 10 / 20)), 9) for i in range(20)]
    np.testing.assert_array_equal(clip.root[:, 0], expected_idx)


@pytest.mark.parametrize("mutate, error", [
    (lambda d: d.update(format_version="2"), SchemaError),
    (lambda d: d.update(joint_names=list(JOINT_NAMES)[:21]), SchemaError),
    (lambda d: d.update(fps=0), SchemaError),
    (lambda d: d.update(frames=[]), SchemaError),
])
def test_import_schema_errors(mutate, error):
    doc = _foreign_doc(4, fps=20)
    mutate(doc)
    with pytest.raises(error):
        import_motion(json.dumps(doc))


def test_import_rejects_wrong_declared_format():
    with pytest.raises(SchemaError):
        import_motion("{}", declared_format="bvh")


def test_import_rejects_malformed_json():
    with pytest.raises(ParseError):
        import_motion(b"\xff\xfe not json")
    with pytest.raises(ParseError):
        import_motion("[1, 2, 3]")


def test_import_rejects_bad_quat_shape():
    doc = _foreign_doc(2, fps=20)
    doc["frames"][0]["quats"] = [[1.0, 0.0, 0.0]] * N_JOINTS
    with pytest.raises((SchemaError, ParseError)):
        import_motion(json.dumps(doc))
