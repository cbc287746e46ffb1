"""External video-encoder hook.

No encoder is bundled: the operator configures a command template (config
file or DANCEDESK_ENCODER_TEMPLATE) with {input_pattern}, {fps} and
{output} placeholders, e.g.

    ffmpeg -y -framerate {fps} -i {input_pattern} -pix_fmt yuv420p {output}
"""
import os
import shlex
import subprocess

from ..errors import EncoderFailed, NotConfigured
from ..motion import FPS

ENV_VAR = "DANCEDESK_ENCODER_TEMPLATE"


def encode_video(frames_dir, output_path, fps: int = FPS, template: str | None = None) -> None:
    template = template or os.environ.get(ENV_VAR)
    if not template:
        raise NotConfigured(
            "no video encoder configured: set the encoder_template config key or "
            f"the {ENV_VAR} environment variable to a command template with "
            "{input_pattern}, {fps} and {output} placeholders"
        )
    first = os.path.join(frames_dir, "frame_00000.png")
    if not os.path.exists(first):
        raise EncoderFailed(f"no sequentially numbered frames found in {frames_dir}")
    pattern = os.path.join(frames_dir, "frame_%05d.png")
    argv = [
        tok.format(input_pattern=pattern, fps=fps, output=str(output_path))
        for tok in shlex.split(template)
    ]
    result = subprocess.run(argv, capture_output=True, text=True)
    if result.returncode != 0:
        raise EncoderFailed(
            f"encoder command {argv[0]!r} exited {result.returncode}: {result.stderr.strip()[:2000]}"
        )
