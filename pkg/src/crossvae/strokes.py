"""Stroke data pipeline: parse, normalize, resample, rasterize, synthesize, split.

Conventions
-----------
A stroke sample holds raw (x, y) points in arbitrary device units, y up. A
trajectory is a fixed-length (T, 2) float array with every coordinate in
[0, 1]. A bitmap is a 32x32 float array with background 0 and foreground 1;
row 0 is the top of the image (y = 1 maps to row 0).

The stroke file format is newline-delimited JSON, one record per line:
``{"label": <string>, "strokes": [[[x, y], ...], ...]}``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from .templates import LETTER_TEMPLATES

IMG_SIZE = 32


@dataclass
class StrokeSample:
    """One handwritten character: a label and its strokes in writing order."""

    label: str
    strokes: list  # list of (M_i, 2) float arrays, M_i >= 1

    def point_count(self):
        return sum(len(s) for s in self.strokes)


@dataclass
class DatasetItem:
    label: str
    traj: np.ndarray    # (T, 2) in [0, 1]
    bitmap: np.ndarray  # (32, 32) in {0, 1}


@dataclass
class Dataset:
    items: list[DatasetItem] = field(default_factory=list)
    split: str = ""

    def __len__(self):
        return len(self.items)

    def labels(self):
        return sorted({it.label for it in self.items})


def _validate_sample(label, strokes, where):
    if not strokes:
        raise ValidationError(f"{where}: record (label {label!r}) has zero strokes")
    for si, s in enumerate(strokes):
        if len(s) == 0:
            raise ValidationError(f"{where}: record (label {label!r}) stroke {si} has zero points")


def parse_stroke_file(data) -> list[StrokeSample]:
    """Parse newline-delimited stroke JSON into samples, preserving order.

    Raises ParseError with the 1-based line number on malformed JSON and
    ValidationError naming the record on invariant violations.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    samples = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"malformed stroke JSON: {e.msg}", line=lineno) from e
        if not isinstance(rec, dict) or "label" not in rec or "strokes" not in rec:
            raise ValidationError(f"line {lineno}: record must have 'label' and 'strokes' fields")
        label = rec["label"]
        raw = rec["strokes"]
        if not isinstance(label, str) or not isinstance(raw, list):
            raise ValidationError(f"line {lineno}: bad field types in record")
        _validate_sample(label, raw, f"line {lineno}")
        strokes = []
        for si, s in enumerate(raw):
            arr = np.asarray(s, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ValidationError(
                    f"line {lineno}: record (label {label!r}) stroke {si} is not a list of [x, y] pairs"
                )
            strokes.append(arr)
        samples.append(StrokeSample(label, strokes))
    return samples


def dump_stroke_file(samples) -> str:
    """Inverse of parse_stroke_file; floats round-trip exactly via repr."""
    lines = []
    for s in samples:
        rec = {"label": s.label, "strokes": [[[float(x), float(y)] for x, y in st] for st in s.strokes]}
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


def normalize(sample: StrokeSample) -> StrokeSample:
    """Uniformly scale and center a sample into the unit square.

    A single scale factor (the larger of the x/y extents) maps the dominant
    axis onto [0, 1]; the shorter axis is centered. A sample with zero extent
    on both axes collapses to (0.5, 0.5).
    """
    _validate_sample(sample.label, sample.strokes, "normalize")
    pts = np.concatenate([np.asarray(s, dtype=np.float64) for s in sample.strokes])
    if not np.all(np.isfinite(pts)):
        raise ValidationError(f"normalize: record (label {sample.label!r}) has non-finite coordinates")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    extent = hi - lo
    scale = float(extent.max())
    out = []
    for s in sample.strokes:
        s = np.asarray(s, dtype=np.float64)
        if scale == 0.0:
            out.append(np.full_like(s, 0.5))
        else:
            offset = (1.0 - extent / scale) / 2.0
            out.append((s - lo) / scale + offset)
    return StrokeSample(sample.label, out)


def resample(sample: StrokeSample, t: int) -> np.ndarray:
    """Concatenate strokes and resample to exactly t points by arc length.

    Pen-up transitions become straight jumps in the concatenated polyline.
    Positions are uniform in cumulative arc length; the first and last points
    of the polyline are preserved exactly. A zero-length polyline repeats its
    single point t times.
    """
    if t < 2:
        raise ValidationError(f"resample: need t >= 2, got {t}")
    pts = np.concatenate([np.asarray(s, dtype=np.float64) for s in sample.strokes])
    if len(pts) == 1:
        return np.tile(pts[0], (t, 1))
    seg = np.diff(pts, axis=0)
    lens = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    total = cum[-1]
    if total == 0.0:
        return np.tile(pts[0], (t, 1))
    targets = np.linspace(0.0, total, t)
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(seg) - 1)
    safe = np.where(lens[idx] > 0.0, lens[idx], 1.0)
    frac = np.where(lens[idx] > 0.0, (targets - cum[idx]) / safe, 0.0)
    out = pts[idx] + frac[:, None] * seg[idx]
    out[0] = pts[0]
    out[-1] = pts[-1]
    return np.clip(out, 0.0, 1.0)


def _bresenham(x0, y0, x1, y1):
    """Integer line from (x0, y0) to (x1, y1), both endpoints included."""
    points = []
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    x, y = x0, y0
    while True:
        points.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy
    return points


def rasterize(traj: np.ndarray) -> np.ndarray:
    """Render a trajectory onto a 32x32 binary grid via Bresenham segments.

    Grid mapping: col = round(x * 31), row = round((1 - y) * 31), rounding
    half up. Foreground pixels are 1.0, background 0.0.
    """
    traj = np.asarray(traj, dtype=np.float64)
    if traj.ndim != 2 or traj.shape[1] != 2 or len(traj) == 0:
        raise ValidationError(f"rasterize: expected (T, 2) trajectory, got shape {tuple(traj.shape)}")
    if traj.min() < 0.0 or traj.max() > 1.0:
        raise ValidationError("rasterize: trajectory coordinates must lie in [0, 1]")
    n = IMG_SIZE - 1
    cols = np.floor(traj[:, 0] * n + 0.5).astype(int)
    rows = np.floor((1.0 - traj[:, 1]) * n + 0.5).astype(int)
    grid = np.zeros((IMG_SIZE, IMG_SIZE), dtype=np.float64)
    grid[rows[0], cols[0]] = 1.0
    for i in range(len(traj) - 1):
        for cx, cy in _bresenham(cols[i], rows[i], cols[i + 1], rows[i + 1]):
            grid[cy, cx] = 1.0
    return grid


def build_dataset(samples, t: int, split: str = "") -> Dataset:
    """normalize -> resample -> rasterize each sample into a paired item."""
    items = []
    for s in samples:
        traj = resample(normalize(s), t)
        items.append(DatasetItem(s.label, traj, rasterize(traj)))
    return Dataset(items, split)


def synth_samples(
    seed,
    n_per_class: int,
    classes,
    scale_jitter: float = 0.1,
    translate_jitter: float = 0.05,
    rotate_jitter: float = 10.0,
    noise_sigma: float = 0.01,
) -> list[StrokeSample]:
    """Jittered template samples: per-axis scale, rotation (slant, in degrees),
    translation, and point noise.

    Deterministic for a fixed seed. Scale and rotation are applied about the
    box center (0.5, 0.5); all strokes of a sample share one affine draw.
    Rotation is what keeps the per-class average pattern from being a
    near-perfect predictor: without it, arc-length-resampled trajectories of
    a class are pointwise aligned and their mean is nearly every member.
    """
    if n_per_class < 1:
        raise ValidationError(f"synth_samples: need n_per_class >= 1, got {n_per_class}")
    for label in classes:
        if label not in LETTER_TEMPLATES:
            supported = "".join(sorted(LETTER_TEMPLATES))
            raise ValidationError(
                f"synth_samples: unknown class {label!r}; supported classes are {supported}"
            )
    rng = np.random.default_rng(seed)
    samples = []
    for label in classes:
        template = [np.asarray(s, dtype=np.float64) for s in LETTER_TEMPLATES[label]]
        for _ in range(n_per_class):
            sxy = 1.0 + rng.uniform(-scale_jitter, scale_jitter, size=2)
            theta = np.radians(rng.uniform(-rotate_jitter, rotate_jitter))
            txy = rng.uniform(-translate_jitter, translate_jitter, size=2)
            rot = np.array(
                [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
            )
            strokes = []
            for s in template:
                pts = ((s - 0.5) * sxy) @ rot.T + 0.5 + txy
                pts = pts + rng.normal(0.0, noise_sigma, size=pts.shape) if noise_sigma > 0 else pts
                strokes.append(pts)
            samples.append(StrokeSample(label, strokes))
    return samples


def synth_dataset(seed, n_per_class: int, classes, t: int = 64, **jitter) -> Dataset:
    """Synthetic paired dataset built from jittered letter templates."""
    return build_dataset(synth_samples(seed, n_per_class, classes, **jitter), t)


def split(dataset: Dataset, train_fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Deterministic stratified split into disjoint, exhaustive train/test sets."""
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"split: train_fraction must be in (0, 1), got {train_fraction}")
    by_label: dict[str, list[int]] = {}
    for i, item in enumerate(dataset.items):
        by_label.setdefault(item.label, []).append(i)
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in sorted(by_label):
        idx = np.array(by_label[label])
        if len(idx) < 2:
            raise ValidationError(f"split: class {label!r} has fewer than 2 items")
        perm = rng.permutation(len(idx))
        k = int(round(train_fraction * len(idx)))
        k = min(max(k, 1), len(idx) - 1)
        train_idx.extend(idx[perm[:k]])
        test_idx.extend(idx[perm[k:]])
    train_idx.sort()
    test_idx.sort()
    return (
        Dataset([dataset.items[i] for i in train_idx], "train"),
        Dataset([dataset.items[i] for i in test_idx], "test"),
    )
