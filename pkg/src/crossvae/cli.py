"""Command-line entry points.

Subcommands: synth, ingest, train, convert, eval, render. Exit codes:
0 success, 1 usage error, 2 runtime error.
"""

import argparse
import sys

import numpy as np

from . import metrics as metrics_mod
from . import strokes as strokes_mod
from .checkpoint import load_checkpoint, save_checkpoint
from .errors import CrossVaeError
from .losses import LossWeights
from .model import ModelConfig
from .pngio import png_to_bitmap, read_png, write_png
from .render import RenderSpec, figure_grid, render_trajectory
from .training import TrainConfig, model_from_checkpoint, train


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    p = _Parser(prog="crossvae", description="Handwritten-character modality conversion")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="emit a synthetic stroke JSON dataset")
    sp.add_argument("--out", required=True)
    sp.add_argument("--classes", default="ABCDE")
    sp.add_argument("--n-per-class", type=int, default=40)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("ingest", help="validate and normalize a stroke JSON file")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("train", help="train a model and write a checkpoint")
    sp.add_argument("--data", required=True)
    sp.add_argument("--epochs", type=int, default=200)
    sp.add_argument("--batch", type=int, default=32)
    sp.add_argument("--latent-dim", type=int, default=32)
    sp.add_argument("--seq-encoder", choices=("conv", "lstm"), default="conv")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--seq-len", type=int, default=64)
    sp.add_argument("--resume", default=None)
    sp.add_argument("--quiet", action="store_true")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("convert", help="convert one record between modalities")
    sp.add_argument("--model", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--direction", choices=("t2b", "b2t", "t2t", "b2b"), required=True)
    sp.add_argument("--index", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("eval", help="evaluate a model, print a metrics report")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("render", help="render trajectories or a model conversion grid")
    sp.add_argument("--input", default=None, help="stroke JSON to render as a trajectory image")
    sp.add_argument("--model", default=None, help="checkpoint for a conversion grid (needs --data)")
    sp.add_argument("--data", default=None)
    sp.add_argument("--index", type=int, default=0)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--size", type=int, default=256)
    sp.add_argument("--points", type=int, default=64)
    sp.add_argument("--out", required=True)
    return p


def _read_samples(path):
    with open(path, "rb") as f:
        return strokes_mod.parse_stroke_file(f.read())


def _traj_record(label, traj):
    return strokes_mod.StrokeSample(label, [np.asarray(traj, dtype=np.float64)])


def _load_input_pair(path, model, index):
    """Resolve --input into (trajectory or None, bitmap or None)."""
    t = model.config.seq_len
    if path.endswith(".png"):
        bitmap = png_to_bitmap(read_png(path), model.config.img_size)
        return None, bitmap
    samples = _read_samples(path)
    if not 0 <= index < len(samples):
        raise CrossVaeError(f"--index {index} out of range for {len(samples)} records")
    traj = strokes_mod.resample(strokes_mod.normalize(samples[index]), t)
    return traj, strokes_mod.rasterize(traj)


def _cmd_synth(args):
    samples = strokes_mod.synth_samples(args.seed, args.n_per_class, list(args.classes))
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(strokes_mod.dump_stroke_file(samples))
    print(f"wrote {len(samples)} records to {args.out}")
    return 0


def _cmd_ingest(args):
    samples = [strokes_mod.normalize(s) for s in _read_samples(args.input)]
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(strokes_mod.dump_stroke_file(samples))
    print(f"validated and normalized {len(samples)} records to {args.out}")
    return 0


def _cmd_train(args):
    resume = load_checkpoint(args.resume) if args.resume else None
    if resume is not None:
        model_cfg = resume.model_config
    else:
        variant = "conv1d" if args.seq_encoder == "conv" else "lstm"
        model_cfg = ModelConfig(latent_dim=args.latent_dim, seq_len=args.seq_len, variant=variant)
    samples = _read_samples(args.data)
    dataset = strokes_mod.build_dataset(samples, model_cfg.seq_len, split="train")
    cfg = TrainConfig(
        model=model_cfg,
        epochs=args.epochs,
        batch_size=args.batch,
        weights=LossWeights(),
        seed=args.seed,
    )
    log = None if args.quiet else (
        lambda r: print(f"epoch {r['epoch']}: total {r['total']:.3f} z_gap {r['z_gap_mean']:.4f}")
    )
    result = train(dataset, cfg, resume=resume, log=log)
    save_checkpoint(args.out, result.to_checkpoint(cfg.epochs, cfg))
    print(f"trained {cfg.epochs} epochs on {len(dataset)} items; checkpoint at {args.out}")
    return 0


def _cmd_convert(args):
    model = model_from_checkpoint(load_checkpoint(args.model))
    traj, bitmap = _load_input_pair(args.input, model, args.index)
    src_is_traj = args.direction[0] == "t"
    if src_is_traj and traj is None:
        raise CrossVaeError(f"direction {args.direction} needs a stroke JSON input, got an image")
    if src_is_traj:
        out = {
            "t2b": model.traj_to_bitmap,
            "t2t": model.traj_to_traj,
        }[args.direction](traj)
    else:
        out = {
            "b2t": model.bitmap_to_traj,
            "b2b": model.bitmap_to_bitmap,
        }[args.direction](bitmap)
    if args.direction.endswith("b"):
        write_png(args.out, np.clip(np.asarray(out) * 255.0, 0, 255).astype(np.uint8))
    else:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(strokes_mod.dump_stroke_file([_traj_record("output", out)]))
    print(f"{args.direction} conversion written to {args.out}")
    return 0


def _cmd_eval(args):
    model = model_from_checkpoint(load_checkpoint(args.model))
    samples = _read_samples(args.data)
    dataset = strokes_mod.build_dataset(samples, model.config.seq_len, split="test")
    report = metrics_mod.evaluate(model, dataset)
    doc = report.to_json()
    print(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(doc + "\n")
    return 0


def _cmd_render(args):
    spec = RenderSpec(size=args.size)
    if args.model:
        if not args.data:
            raise _UsageError("render --model requires --data")
        model = model_from_checkpoint(load_checkpoint(args.model))
        dataset = strokes_mod.build_dataset(_read_samples(args.data), model.config.seq_len)
        items = []
        for it in dataset.items[: args.n]:
            y_bb = model.bitmap_to_bitmap(it.bitmap)
            y_tb = model.traj_to_bitmap(it.traj)
            y_tt = model.traj_to_traj(it.traj)
            y_bt = model.bitmap_to_traj(it.bitmap)
            items.append((
                it.bitmap, y_bb, y_tb,
                render_trajectory(it.traj, spec),
                render_trajectory(y_tt, spec),
                render_trajectory(y_bt, spec),
            ))
        write_png(args.out, figure_grid(items, spec))
    else:
        if not args.input:
            raise _UsageError("render needs --input or --model")
        samples = _read_samples(args.input)
        if not 0 <= args.index < len(samples):
            raise CrossVaeError(f"--index {args.index} out of range for {len(samples)} records")
        traj = strokes_mod.resample(strokes_mod.normalize(samples[args.index]), args.points)
        write_png(args.out, render_trajectory(traj, spec))
    print(f"rendered {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "convert": _cmd_convert,
    "eval": _cmd_eval,
    "render": _cmd_render,
}


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (CrossVaeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
