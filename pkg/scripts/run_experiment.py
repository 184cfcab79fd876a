#!/usr/bin/env python3
"""Desk-scale experiment: train both sequence-encoder variants on synthetic
handwriting, evaluate cross-conversion against the class-average baseline,
and render a qualitative conversion grid per variant.

Usage:
    python scripts/run_experiment.py --outdir results [--epochs 200] [--classes ABCDE]
"""

import argparse
import json
import time
from pathlib import Path

from crossvae.metrics import class_average_baseline, evaluate, evaluate_baseline
from crossvae.model import ModelConfig
from crossvae.pngio import write_png
from crossvae.render import RenderSpec, figure_grid, render_trajectory
from crossvae.strokes import split, synth_dataset
from crossvae.training import TrainConfig, train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--epochs", type=int, default=200)
    ap.add_argument("--classes", default="ABCDE")
    ap.add_argument("--n-per-class", type=int, default=40)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--lr", type=float, default=2e-3)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    dataset = synth_dataset(0, args.n_per_class, args.classes, t=64)
    train_set, test_set = split(dataset, 0.8, seed=1)
    print(f"dataset: {len(train_set)} train / {len(test_set)} test items")

    rows = []
    for variant in ("conv1d", "lstm"):
        cfg = TrainConfig(
            model=ModelConfig(variant=variant),
            epochs=args.epochs,
            seed=args.seed,
            lr=args.lr,
        )
        t0 = time.perf_counter()
        result = train(
            train_set, cfg,
            log=lambda r: print(f"  [{variant}] epoch {r['epoch']}: total {r['total']:.0f}")
            if r["epoch"] % 25 == 0 else None,
        )
        print(f"[{variant}] trained {args.epochs} epochs in {time.perf_counter() - t0:.0f}s")
        report = evaluate(result.model, test_set)
        rows.append(report)
        (args.outdir / f"report_{variant}.json").write_text(report.to_json() + "\n")

        spec = RenderSpec()
        items = []
        for it in test_set.items[:4]:
            items.append((
                it.bitmap,
                result.model.bitmap_to_bitmap(it.bitmap),
                result.model.traj_to_bitmap(it.traj),
                render_trajectory(it.traj, spec),
                render_trajectory(result.model.traj_to_traj(it.traj), spec),
                render_trajectory(result.model.bitmap_to_traj(it.bitmap), spec),
            ))
        write_png(args.outdir / f"grid_{variant}.png", figure_grid(items, spec))

    baseline = evaluate_baseline(class_average_baseline(train_set), test_set)
    rows.append(baseline)
    (args.outdir / "report_class_average.json").write_text(baseline.to_json() + "\n")

    print(f"\n{'model':<16} {'PSNR (dB)':>10} {'SSIM':>8} {'DTW':>9}")
    for r in rows:
        print(f"{r.variant:<16} {r.psnr_mean:>10.3f} {r.ssim_mean:>8.4f} {r.dtw_mean:>9.5f}")
    summary = {r.variant: {"psnr": r.psnr_mean, "ssim": r.ssim_mean, "dtw": r.dtw_mean} for r in rows}
    (args.outdir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
