"""Static figure rendering: time-gradient trajectories and conversion grids.

Trajectory segments are colored along a linear ramp from the start color to
the end color in sequence order (the conventional pink-to-yellow time
coloring). All rendering is integer raster work: identical inputs yield
byte-identical images.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .strokes import _bresenham


@dataclass(frozen=True)
class RenderSpec:
    size: int = 256
    thickness: int = 2
    color_start: tuple = (255, 105, 180)  # pink
    color_end: tuple = (255, 255, 0)      # yellow
    background: tuple = (255, 255, 255)

    def __post_init__(self):
        if self.size < 32:
            raise ValidationError(f"RenderSpec.size must be >= 32, got {self.size}")
        if self.thickness < 1:
            raise ValidationError(f"RenderSpec.thickness must be >= 1, got {self.thickness}")


def segment_color(i: int, n_segments: int, spec: RenderSpec) -> tuple:
    """Color of segment i of n_segments: linear ramp, endpoints exact."""
    frac = i / (n_segments - 1) if n_segments > 1 else 0.0
    return tuple(
        int(round(c0 + (c1 - c0) * frac))
        for c0, c1 in zip(spec.color_start, spec.color_end)
    )


def _stamp(img, px, py, color, thickness):
    h, w, _ = img.shape
    r0 = thickness // 2
    for dy in range(-r0, thickness - r0):
        for dx in range(-r0, thickness - r0):
            x, y = px + dx, py + dy
            if 0 <= x < w and 0 <= y < h:
                img[y, x] = color


def render_trajectory(traj, spec: RenderSpec = RenderSpec()) -> np.ndarray:
    """Render a (T, 2) unit-square trajectory to an RGB uint8 image."""
    traj = np.asarray(traj, dtype=np.float64)
    if traj.ndim != 2 or traj.shape[1] != 2 or len(traj) < 2:
        raise ValidationError(f"render_trajectory: expected (T>=2, 2) trajectory, got {tuple(traj.shape)}")
    n = spec.size - 1
    cols = np.floor(np.clip(traj[:, 0], 0, 1) * n + 0.5).astype(int)
    rows = np.floor((1.0 - np.clip(traj[:, 1], 0, 1)) * n + 0.5).astype(int)
    img = np.empty((spec.size, spec.size, 3), dtype=np.uint8)
    img[:, :] = spec.background
    n_segments = len(traj) - 1
    for i in range(n_segments):
        color = segment_color(i, n_segments, spec)
        for px, py in _bresenham(cols[i], rows[i], cols[i + 1], rows[i + 1]):
            _stamp(img, px, py, color, spec.thickness)
    return img


def bitmap_to_rgb(bitmap, size: int) -> np.ndarray:
    """Upscale a [0,1] grayscale bitmap to an RGB cell by nearest neighbor (ink black)."""
    bitmap = np.asarray(bitmap, dtype=np.float64)
    level = np.clip((1.0 - bitmap) * 255.0, 0, 255).astype(np.uint8)
    f = max(1, size // bitmap.shape[0])
    up = np.repeat(np.repeat(level, f, axis=0), f, axis=1)
    canvas = np.full((size, size), 255, dtype=np.uint8)
    canvas[: up.shape[0], : up.shape[1]] = up[:size, :size]
    return np.stack([canvas] * 3, axis=2)


# 5x7 glyphs for the column labels (X, Y, b, t only)
_FONT = {
    "X": ["10001", "10001", "01010", "00100", "01010", "10001", "10001"],
    "Y": ["10001", "10001", "01010", "00100", "00100", "00100", "00100"],
    "b": ["10000", "10000", "11110", "10001", "10001", "10001", "11110"],
    "t": ["00100", "00100", "11111", "00100", "00100", "00100", "00110"],
}


def _draw_text(img, x, y, text, scale=2, color=(0, 0, 0)):
    for ch in text:
        glyph = _FONT.get(ch)
        if glyph is None:
            x += 6 * scale
            continue
        for gy, row in enumerate(glyph):
            for gx, bit in enumerate(row):
                if bit == "1":
                    img[y + gy * scale:y + (gy + 1) * scale, x + gx * scale:x + (gx + 1) * scale] = color
        x += 6 * scale


GRID_COLUMNS = ("Xb", "Ybb", "Ytb", "Xt", "Ytt", "Ybt")
GRID_PAD = 8
GRID_HEADER = 24


def figure_grid(items, spec: RenderSpec = RenderSpec()) -> np.ndarray:
    """Row-per-sample montage of the six signals, fixed column order.

    Each item is a 6-tuple (x_b, y_bb, y_tb bitmaps in [0,1]; then x_t, y_tt,
    y_bt as pre-rendered RGB images of the spec size). Height is
    GRID_HEADER + n*(size + GRID_PAD) + GRID_PAD.
    """
    if not items:
        raise ValidationError("figure_grid: empty item list")
    cell = spec.size
    pad = GRID_PAD
    width = 6 * (cell + pad) + pad
    height = GRID_HEADER + len(items) * (cell + pad) + pad
    img = np.full((height, width, 3), 255, dtype=np.uint8)
    for col, label in enumerate(GRID_COLUMNS):
        _draw_text(img, pad + col * (cell + pad) + 4, 4, label)
    for row, item in enumerate(items):
        if len(item) != 6:
            raise ValidationError(f"figure_grid: item {row} has {len(item)} cells, expected 6")
        y0 = GRID_HEADER + pad + row * (cell + pad)
        for col, signal in enumerate(item):
            signal = np.asarray(signal)
            cell_img = signal if signal.ndim == 3 else bitmap_to_rgb(signal, cell)
            if cell_img.shape != (cell, cell, 3):
                raise ValidationError(
                    f"figure_grid: cell ({row}, {col}) has shape {cell_img.shape}, "
                    f"expected ({cell}, {cell}, 3)"
                )
            x0 = pad + col * (cell + pad)
            img[y0:y0 + cell, x0:x0 + cell] = cell_img
    return img
