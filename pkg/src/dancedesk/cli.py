"""Command-line driver: dataset building, training, every edit operation,
export, rendering, and the server.

Every invocation prints one JSON summary on stdout. Exit codes: 0 success,
1 usage error, 2 operation error (the summary carries the protocol error
code).
"""
import argparse
import json
import os
import sys

from .errors import DanceDeskError
from .motion import FPS, dumps_clip, loads_clip

USAGE_EXIT = 1
OPERATION_EXIT = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_clip(path):
    with open(path, encoding="utf-8") as f:
        return loads_clip(f.read())


def _write_clip(clip, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_clip(clip))


def _engine(weights_path):
    from .diffusion import DiffusionEngine, load_weights

    return DiffusionEngine(load_weights(weights_path))


def _clip_summary(clip, path):
    return {"id": clip.id, "frames": clip.n_frames, "seconds": clip.n_frames / FPS,
            "kind": clip.provenance.kind, "file": str(path)}


# ---------------------------------------------------------------------------
# corpus directory layout: manifest.json + clips/NNNNN.json in dataset order
# ---------------------------------------------------------------------------

def save_corpus(pairs, manifest, out_dir):
    clips_dir = os.path.join(out_dir, "clips")
    os.makedirs(clips_dir, exist_ok=True)
    for i, (clip, _) in enumerate(pairs):
        _write_clip(clip, os.path.join(clips_dir, f"{i:05d}.json"))
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump({
            "clips_per_genre": manifest.clips_per_genre,
            "duration_s": manifest.duration_s,
            "seed": manifest.seed,
            "style_fraction": manifest.style_fraction,
            "count": len(pairs),
        }, f, indent=2)


def load_corpus(corpus_dir):
    """(clip, caption) pairs; the caption is the clip's stored prompt."""
    clips_dir = os.path.join(corpus_dir, "clips")
    pairs = []
    for name in sorted(os.listdir(clips_dir)):
        if not name.endswith(".json"):
            continue
        clip = _load_clip(os.path.join(clips_dir, name))
        caption = clip.provenance.prompts[0] if clip.provenance.prompts else ""
        pairs.append((clip, caption))
    return pairs


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_dataset_build(args):
    from .synth import DatasetManifest, build_dataset

    manifest = DatasetManifest(clips_per_genre=args.clips_per_genre, duration_s=args.duration,
                               seed=args.seed, style_fraction=args.style_fraction)
    pairs = build_dataset(manifest)
    save_corpus(pairs, manifest, args.out)
    styled = sum(1 for clip, _ in pairs if clip.provenance.style)
    return {"corpus": str(args.out), "clips": len(pairs), "styled": styled}


def _cmd_train(args):
    from .diffusion import DenoiserConfig, save_weights
    from .diffusion.training import train

    corpus = load_corpus(args.corpus)
    config = None
    if args.model_config:
        with open(args.model_config, encoding="utf-8") as f:
            config = DenoiserConfig(**json.load(f))
    weights = train(corpus, config=config, epochs=args.epochs, seed=args.seed,
                    batch_size=args.batch_size, lr=args.lr)
    save_weights(weights, args.out)
    return {"weights": str(args.out), "epochs": args.epochs, "clips": len(corpus),
            "initial_loss": weights.loss_trace[0], "final_loss": weights.loss_trace[-1]}


def _cmd_generate(args):
    from .edits import generate_dance

    engine = _engine(args.weights)
    result = generate_dance(engine, args.prompt, args.seconds, args.seed)
    os.makedirs(args.out, exist_ok=True)
    clips = []
    for clip in result.clips:
        path = os.path.join(args.out, f"{clip.id}.json")
        _write_clip(clip, path)
        clips.append(_clip_summary(clip, path))
    return {"prompt": result.prompt, "seeds": list(result.seeds), "clips": clips}


def _cmd_extend(args):
    from .edits import extend_dance

    clip = extend_dance(_engine(args.weights), _load_clip(args.infile), args.seconds, args.seed)
    _write_clip(clip, args.out)
    return _clip_summary(clip, args.out)


def _cmd_style(args):
    from .edits import apply_style

    clip = apply_style(_engine(args.weights), _load_clip(args.infile), args.style, args.seed,
                       t_edit=args.t_edit)
    _write_clip(clip, args.out)
    return {**_clip_summary(clip, args.out), "style": args.style}


def _cmd_edit_part(args):
    from .edits import edit_body_part

    clip = edit_body_part(_engine(args.weights), _load_clip(args.infile), args.part,
                          args.text, args.seed)
    _write_clip(clip, args.out)
    return {**_clip_summary(clip, args.out), "part": args.part}


def _cmd_blend(args):
    from .edits import blend_dances

    clip = blend_dances(_engine(args.weights), _load_clip(args.a), _load_clip(args.b), args.seed)
    _write_clip(clip, args.out)
    return _clip_summary(clip, args.out)


def _cmd_export_gltf(args):
    from .exporter.gltf import export_gltf

    data = export_gltf(_load_clip(args.infile))
    with open(args.out, "wb") as f:
        f.write(data)
    return {"file": str(args.out), "bytes": len(data)}


def _cmd_render(args):
    from .exporter.render import render_to_dir
    from .exporter.video import encode_video

    clip = _load_clip(args.infile)
    paths = render_to_dir(clip, args.outdir)
    summary = {"id": clip.id, "frames": len(paths), "outdir": str(args.outdir)}
    if args.encode:
        video = args.video or os.path.join(args.outdir, f"{clip.id}.mp4")
        encode_video(args.outdir, video)
        summary["video"] = str(video)
    return summary


def _cmd_serve(args):
    from .server import DanceDeskServer, load_config

    config = load_config(args.config)
    server = DanceDeskServer(config)
    port = server.start()
    print(json.dumps({"listening": f"{config['bind_address']}:{port}"}), flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return None  # summary already printed at startup


# ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="dancedesk", description="Text-conditioned dance generation and editing.")
    sub = parser.add_subparsers(dest="command", required=True)

    dataset = sub.add_parser("dataset", help="synthetic corpus tools")
    dataset_sub = dataset.add_subparsers(dest="dataset_command", required=True)
    build = dataset_sub.add_parser("build", help="build the labeled synthetic corpus")
    build.add_argument("--out", required=True)
    build.add_argument("--clips-per-genre", type=int, required=True)
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--duration", type=float, default=10.0)
    build.add_argument("--style-fraction", type=float, default=0.5)
    build.set_defaults(func=_cmd_dataset_build)

    train = sub.add_parser("train", help="train denoiser weights on a corpus")
    train.add_argument("--corpus", required=True)
    train.add_argument("--out", required=True)
    train.add_argument("--epochs", type=int, default=30)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--batch-size", type=int, default=16)
    train.add_argument("--lr", type=float, default=3e-4)
    train.add_argument("--model-config", help="JSON file of denoiser hyperparameters")
    train.set_defaults(func=_cmd_train)

    gen = sub.add_parser("generate", help="generate 3 clips for one prompt")
    gen.add_argument("--weights", required=True)
    gen.add_argument("--prompt", required=True)
    gen.add_argument("--seconds", type=float, default=5.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=_cmd_generate)

    ext = sub.add_parser("extend", help="append seconds to a clip")
    ext.add_argument("--weights", required=True)
    ext.add_argument("--in", dest="infile", required=True)
    ext.add_argument("--seconds", type=float, required=True)
    ext.add_argument("--seed", type=int, default=0)
    ext.add_argument("--out", required=True)
    ext.set_defaults(func=_cmd_extend)

    sty = sub.add_parser("style", help="re-diffuse a clip under a style")
    sty.add_argument("--weights", required=True)
    sty.add_argument("--in", dest="infile", required=True)
    sty.add_argument("--style", required=True)
    sty.add_argument("--seed", type=int, default=0)
    sty.add_argument("--t-edit", dest="t_edit", type=int, default=None,
                     help="restyle strength (diffusion steps re-run; default per style)")
    sty.add_argument("--out", required=True)
    sty.set_defaults(func=_cmd_style)

    part = sub.add_parser("edit-part", help="resynthesize one body group")
    part.add_argument("--weights", required=True)
    part.add_argument("--in", dest="infile", required=True)
    part.add_argument("--part", required=True)
    part.add_argument("--text", required=True)
    part.add_argument("--seed", type=int, default=0)
    part.add_argument("--out", required=True)
    part.set_defaults(func=_cmd_edit_part)

    blend = sub.add_parser("blend", help="join two clips with a synthesized connector")
    blend.add_argument("--weights", required=True)
    blend.add_argument("--a", required=True)
    blend.add_argument("--b", required=True)
    blend.add_argument("--seed", type=int, default=0)
    blend.add_argument("--out", required=True)
    blend.set_defaults(func=_cmd_blend)

    gltf = sub.add_parser("export-gltf", help="export a clip as a glTF animation")
    gltf.add_argument("--in", dest="infile", required=True)
    gltf.add_argument("--out", required=True)
    gltf.set_defaults(func=_cmd_export_gltf)

    render = sub.add_parser("render", help="render stick-figure frames (optionally a video)")
    render.add_argument("--in", dest="infile", required=True)
    render.add_argument("--outdir", required=True)
    render.add_argument("--encode", action="store_true")
    render.add_argument("--video", help="video output path (with --encode)")
    render.set_defaults(func=_cmd_render)

    serve = sub.add_parser("serve", help="run the protocol server")
    serve.add_argument("--config", help="JSON config file; DANCEDESK_* env vars override")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(json.dumps({"status": "error", "code": "USAGE", "message": str(exc)}), file=sys.stderr)
        return USAGE_EXIT
    try:
        summary = args.func(args)
    except DanceDeskError as exc:
        print(json.dumps({"status": "error", "code": exc.code, "message": str(exc)}))
        return OPERATION_EXIT
    except OSError as exc:
        print(json.dumps({"status": "error", "code": "INTERNAL", "message": str(exc)}))
        return OPERATION_EXIT
    if summary is not None:
        print(json.dumps({"status": "ok", **summary}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
