"""Evaluation metrics and the cross-conversion report.

PSNR and SSIM score the trajectory-to-image direction against the reference
bitmap; DTW scores the image-to-trajectory direction against the reference
trajectory. The class-average predictor (per-class mean bitmap and mean
trajectory) is the comparison baseline. Evaluation decodes from posterior
means, so reports are deterministic.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, ValidationError
from .strokes import Dataset

# SSIM stabilizers for pixel values rescaled to [0, 255]
SSIM_C1 = (0.01 * 255.0) ** 2
SSIM_C2 = (0.03 * 255.0) ** 2


def worker_count() -> int:
    """Parallelism cap from CROSSVAE_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("CROSSVAE_THREADS", "1")))
    except ValueError:
        return 1


def psnr(x, y, max_val=1.0) -> float:
    """10*log10(MAX^2 / MSE) in dB; identical images give +inf."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"psnr: shapes differ, {tuple(x.shape)} vs {tuple(y.shape)}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_val * max_val / mse)


def ssim(x, y) -> float:
    """Global (single-window) structural similarity, product form.

    Pixels are rescaled to [0, 255] so the standard stabilizing constants
    apply; statistics are population moments over the whole image.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"ssim: shapes differ, {tuple(x.shape)} vs {tuple(y.shape)}")
    xs = x.reshape(-1) * 255.0
    ys = y.reshape(-1) * 255.0
    mx = xs.mean()
    my = ys.mean()
    vx = ((xs - mx) ** 2).mean()
    vy = ((ys - my) ** 2).mean()
    cov = ((xs - mx) * (ys - my)).mean()
    num = (2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2)
    return float(num / den)


def dtw(a, b) -> float:
    """Dynamic-time-warping distance, normalized by warping-path length.

    Monotone alignment with match/insert/delete steps, per-pair cost the
    Euclidean distance between points, anchored first-to-first and
    last-to-last. The DP minimizes (total cost, path length)
    lexicographically, so the normalizing length is well-defined under ties;
    the returned value is total cost / path length.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValidationError(f"dtw: expected (n, d) sequences, got {a.shape} and {b.shape}")
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValidationError("dtw: empty input sequence")
    diff = a[:, None, :] - b[None, :, :]
    sq = diff * diff
    acc = sq[:, :, 0]
    for k in range(1, sq.shape[2]):  # fixed summation order: matches a scalar loop
        acc = acc + sq[:, :, k]
    d = np.sqrt(acc)
    inf = math.inf
    cost = [[inf] * m for _ in range(n)]
    length = [[0] * m for _ in range(n)]
    for i in range(n):
        di = d[i]
        ci = cost[i]
        li = length[i]
        for jj in range(m):
            if i == 0 and jj == 0:
                ci[0] = di[0]
                li[0] = 1
                continue
            best_c, best_l = inf, 0
            if i > 0 and jj > 0:
                best_c, best_l = cost[i - 1][jj - 1], length[i - 1][jj - 1]
            if i > 0:
                c2, l2 = cost[i - 1][jj], length[i - 1][jj]
                if c2 < best_c or (c2 == best_c and l2 < best_l):
                    best_c, best_l = c2, l2
            if jj > 0:
                c2, l2 = ci[jj - 1], li[jj - 1]
                if c2 < best_c or (c2 == best_c and l2 < best_l):
                    best_c, best_l = c2, l2
            ci[jj] = best_c + di[jj]
            li[jj] = best_l + 1
    return cost[n - 1][m - 1] / length[n - 1][m - 1]


def class_average_baseline(train: Dataset) -> dict:
    """Per-class (mean bitmap, mean trajectory) over the training items."""
    if len(train) == 0:
        raise ValidationError("class_average_baseline: empty dataset")
    groups: dict[str, list] = {}
    for it in train.items:
        groups.setdefault(it.label, []).append(it)
    out = {}
    for label in sorted(groups):
        items = groups[label]
        mean_bitmap = np.mean([it.bitmap for it in items], axis=0)
        mean_traj = np.mean([it.traj for it in items], axis=0)
        out[label] = (mean_bitmap, mean_traj)
    return out


@dataclass
class MetricsReport:
    psnr_mean: float
    ssim_mean: float
    dtw_mean: float
    n_items: int
    variant: str
    per_class: dict = field(default_factory=dict)
    psnr_exact_matches: int = 0

    def to_json(self) -> str:
        doc = {
            "psnr_mean": self.psnr_mean,
            "ssim_mean": self.ssim_mean,
            "dtw_mean": self.dtw_mean,
            "n_items": self.n_items,
            "variant": self.variant,
            "per_class": self.per_class,
            "psnr_exact_matches": self.psnr_exact_matches,
        }
        return json.dumps(doc, indent=2, sort_keys=False)


def _aggregate(rows, variant) -> MetricsReport:
    finite_psnr = [r["psnr"] for r in rows if math.isfinite(r["psnr"])]
    exact = sum(1 for r in rows if not math.isfinite(r["psnr"]))
    per_class: dict[str, dict] = {}
    for label in sorted({r["label"] for r in rows}):
        sub = [r for r in rows if r["label"] == label]
        sub_psnr = [r["psnr"] for r in sub if math.isfinite(r["psnr"])]
        per_class[label] = {
            "psnr": float(np.mean(sub_psnr)) if sub_psnr else math.inf,
            "ssim": float(np.mean([r["ssim"] for r in sub])),
            "dtw": float(np.mean([r["dtw"] for r in sub])),
            "n": len(sub),
        }
    return MetricsReport(
        psnr_mean=float(np.mean(finite_psnr)) if finite_psnr else math.inf,
        ssim_mean=float(np.mean([r["ssim"] for r in rows])),
        dtw_mean=float(np.mean([r["dtw"] for r in rows])),
        n_items=len(rows),
        variant=variant,
        per_class=per_class,
        psnr_exact_matches=exact,
    )


def _eval_rows(predict, test: Dataset):
    """predict(item) -> (bitmap_pred, traj_pred); rows in dataset order."""
    if len(test) == 0:
        raise ValidationError("evaluate: empty test set")

    def one(item):
        bitmap_pred, traj_pred = predict(item)
        return {
            "label": item.label,
            "psnr": psnr(item.bitmap, bitmap_pred),
            "ssim": ssim(item.bitmap, bitmap_pred),
            "dtw": dtw(item.traj, traj_pred),
        }

    threads = worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, test.items))
    return [one(item) for item in test.items]


def evaluate(model, test: Dataset) -> MetricsReport:
    """Cross-conversion metrics from posterior-mean decoding, aggregated."""

    def predict(item):
        return model.traj_to_bitmap(item.traj), model.bitmap_to_traj(item.bitmap)

    return _aggregate(_eval_rows(predict, test), model.config.variant)


def evaluate_baseline(averages: dict, test: Dataset) -> MetricsReport:
    """Score the class-average predictor with the same protocol."""

    def predict(item):
        if item.label not in averages:
            raise ValidationError(f"evaluate_baseline: no class average for label {item.label!r}")
        mean_bitmap, mean_traj = averages[item.label]
        return mean_bitmap, mean_traj

    return _aggregate(_eval_rows(predict, test), "class_average")
