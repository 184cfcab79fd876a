import numpy as np
import pytest

from crossvae.errors import ValidationError
from crossvae.pngio import decode_png, encode_png, png_to_bitmap
from crossvae.render import (
    GRID_HEADER,
    GRID_PAD,
    RenderSpec,
    bitmap_to_rgb,
    figure_grid,
    render_trajectory,
    segment_color,
)


def sample_traj(t=16, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0, 1, size=(t, 2))


# --- color ramp -----------------------------------------------------------------

def test_first_segment_is_pink():
    spec = RenderSpec()
    assert segment_color(0, 15, spec) == (255, 105, 180)


def test_last_segment_is_yellow():
    spec = RenderSpec()
    assert segment_color(14, 15, spec) == (255, 255, 0)


def test_ramp_is_monotone_in_green():
    spec = RenderSpec()
    greens = [segment_color(i, 10, spec)[1] for i in range(10)]
    assert greens == sorted(greens)


def test_render_contains_both_endpoint_colors():
    img = render_trajectory(np.array([[0.1, 0.1], [0.9, 0.5], [0.1, 0.9]]), RenderSpec())
    flat = img.reshape(-1, 3)
    assert (flat == np.array([255, 105, 180])).all(axis=1).any()
    assert (flat == np.array([255, 255, 0])).all(axis=1).any()


# --- render_trajectory ----------------------------------------------------------

def test_render_shape_and_determinism():
    spec = RenderSpec(size=64, thickness=1)
    a = render_trajectory(sample_traj(), spec)
    b = render_trajectory(sample_traj(), spec)
    assert a.shape == (64, 64, 3)
    assert a.dtype == np.uint8
    np.testing.assert_array_equal(a, b)


def test_render_png_bytes_identical():
    spec = RenderSpec(size=48)
    a = encode_png(render_trajectory(sample_traj(seed=3), spec))
    b = encode_png(render_trajectory(sample_traj(seed=3), spec))
    assert a == b


def test_render_spec_validation():
    with pytest.raises(ValidationError):
        RenderSpec(size=16)
    with pytest.raises(ValidationError):
        RenderSpec(thickness=0)


def test_render_needs_two_points():
    with pytest.raises(ValidationError):
        render_trajectory(np.array([[0.5, 0.5]]))


# --- figure_grid ------------------------------------------------------------------

def _grid_items(n, spec):
    rng = np.random.default_rng(1)
    items = []
    for _ in range(n):
        bm = (rng.uniform(size=(32, 32)) > 0.8).astype(float)
        rd = render_trajectory(rng.uniform(0, 1, (8, 2)), spec)
        items.append((bm, bm, bm, rd, rd, rd))
    return items


def test_grid_height_formula():
    spec = RenderSpec(size=64)
    for n in (1, 2, 5):
        img = figure_grid(_grid_items(n, spec), spec)
        assert img.shape[0] == GRID_HEADER + n * (64 + GRID_PAD) + GRID_PAD
        assert img.shape[1] == 6 * (64 + GRID_PAD) + GRID_PAD


def test_grid_single_item_has_six_cells():
    spec = RenderSpec(size=64)
    img = figure_grid(_grid_items(1, spec), spec)
    # cells are separated by white padding; check each cell region is non-background
    y0 = GRID_HEADER + GRID_PAD
    for col in range(6):
        x0 = GRID_PAD + col * (64 + GRID_PAD)
        cell = img[y0:y0 + 64, x0:x0 + 64]
        assert cell.shape == (64, 64, 3)
    assert img.dtype == np.uint8


def test_grid_empty_rejected():
    with pytest.raises(ValidationError):
        figure_grid([], RenderSpec())


def test_grid_deterministic_bytes():
    spec = RenderSpec(size=64)
    a = encode_png(figure_grid(_grid_items(2, spec), spec))
    b = encode_png(figure_grid(_grid_items(2, spec), spec))
    assert a == b


# --- png io -------------------------------------------------------------------------

def test_png_roundtrip_rgb():
    rng = np.random.default_rng(2)
    img = rng.integers(0, 256, size=(20, 30, 3), dtype=np.uint8)
    np.testing.assert_array_equal(decode_png(encode_png(img)), img)


def test_png_roundtrip_gray():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
    np.testing.assert_array_equal(decode_png(encode_png(img)), img)


def test_png_matches_pillow_decoder():
    PIL_Image = pytest.importorskip("PIL.Image")
    import io

    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, size=(16, 24, 3), dtype=np.uint8)
    data = encode_png(img)
    with PIL_Image.open(io.BytesIO(data)) as im:
        np.testing.assert_array_equal(np.asarray(im.convert("RGB")), img)


def test_png_reads_pillow_output():
    PIL_Image = pytest.importorskip("PIL.Image")
    import io

    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, size=(16, 24, 3), dtype=np.uint8)
    buf = io.BytesIO()
    PIL_Image.fromarray(img).save(buf, format="PNG")
    np.testing.assert_array_equal(decode_png(buf.getvalue()), img)


def test_png_to_bitmap_shape_check():
    img = np.zeros((16, 16), dtype=np.uint8)
    with pytest.raises(ValidationError):
        png_to_bitmap(img, size=32)
    out = png_to_bitmap(np.full((32, 32), 255, dtype=np.uint8))
    np.testing.assert_array_equal(out, np.ones((32, 32)))


def test_bitmap_to_rgb_ink_is_dark():
    bm = np.zeros((32, 32))
    bm[5, 7] = 1.0
    rgb = bitmap_to_rgb(bm, 64)
    assert rgb.shape == (64, 64, 3)
    assert rgb[10, 14, 0] == 0  # ink pixel scaled 2x
    assert rgb[0, 0, 0] == 255  # background white
