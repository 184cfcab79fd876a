import json
import math

import numpy as np
import pytest

from crossvae.errors import ShapeError, ValidationError
from crossvae.metrics import (
    MetricsReport,
    SSIM_C1,
    class_average_baseline,
    dtw,
    evaluate,
    evaluate_baseline,
    psnr,
    ssim,
)
from crossvae.strokes import Dataset, DatasetItem, synth_dataset


# --- independent oracles ---------------------------------------------------------

def ssim_stats_oracle(x, y):
    """Statistics computed by hand with plain Python sums."""
    xs = [float(v) * 255.0 for v in np.asarray(x).reshape(-1)]
    ys = [float(v) * 255.0 for v in np.asarray(y).reshape(-1)]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    vx = sum((v - mx) ** 2 for v in xs) / n
    vy = sum((v - my) ** 2 for v in ys) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(xs, ys)) / n
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    return ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx**2 + my**2 + c1) * (vx + vy + c2))


def dtw_bruteforce(a, b):
    """Enumerate every monotone alignment; minimize (cost, length); return cost/length."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    best = (math.inf, 0)

    def dist(p, q):
        acc = (p[0] - q[0]) * (p[0] - q[0])
        for k in range(1, len(p)):
            acc = acc + (p[k] - q[k]) * (p[k] - q[k])
        return math.sqrt(acc)

    def walk(i, j, cost, steps):
        nonlocal best
        cost += dist(a[i], b[j])
        steps += 1
        if (i, j) == (n - 1, m - 1):
            if (cost, steps) < best:
                best = (cost, steps)
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, cost, steps)
        if i + 1 < n:
            walk(i + 1, j, cost, steps)
        if j + 1 < m:
            walk(i, j + 1, cost, steps)

    walk(0, 0, 0.0, 0)
    return best[0] / best[1]


# --- psnr -------------------------------------------------------------------------

def test_psnr_20db_at_mse_001():
    x = np.zeros((32, 32))
    y = np.full((32, 32), 0.1)  # mse = 0.01
    assert abs(psnr(x, y, max_val=1.0) - 20.0) < 1e-12


def test_psnr_identical_is_infinite():
    x = np.random.default_rng(0).uniform(size=(32, 32))
    assert psnr(x, x) == math.inf


def test_psnr_zero_db_at_mse_one():
    assert abs(psnr(np.zeros((8, 8)), np.ones((8, 8)))) < 1e-12


def test_psnr_monotone_in_noise():
    rng = np.random.default_rng(1)
    x = rng.uniform(size=(32, 32))
    values = []
    for scale in (0.01, 0.05, 0.1, 0.2):
        noise = rng.standard_normal((32, 32)) * scale
        values.append(psnr(x, np.clip(x + noise, 0, 1)))
    assert all(a > b for a, b in zip(values, values[1:]))


def test_psnr_shape_mismatch():
    with pytest.raises(ShapeError):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


# --- ssim ------------------------------------------------------------------------

def test_ssim_identical_is_one():
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = rng.uniform(size=(32, 32))
        assert ssim(x, x) == 1.0


def test_ssim_constant_images():
    got = ssim(np.zeros((32, 32)), np.ones((32, 32)))
    expected = SSIM_C1 / (255.0**2 + SSIM_C1)
    # 255-rescaled constant images: numerator C1*C2, denominator (255^2+C1)*C2
    assert abs(got - expected) < 1e-12
    assert abs(got - 1.0e-4) < 2e-6


def test_ssim_matches_stats_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        x = rng.uniform(size=(16, 16))
        y = np.clip(x + rng.standard_normal((16, 16)) * rng.uniform(0.01, 0.5), 0, 1)
        assert abs(ssim(x, y) - ssim_stats_oracle(x, y)) < 1e-10


def test_ssim_symmetric():
    rng = np.random.default_rng(4)
    x = rng.uniform(size=(8, 8))
    y = rng.uniform(size=(8, 8))
    assert ssim(x, y) == ssim(y, x)


# --- dtw --------------------------------------------------------------------------

def test_dtw_identical_zero():
    a = np.random.default_rng(5).uniform(size=(10, 2))
    assert dtw(a, a) == 0.0


def test_dtw_repeated_point_absorbed():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    assert dtw(a, b) == 0.0


def test_dtw_symmetric_and_nonnegative():
    rng = np.random.default_rng(6)
    for _ in range(10):
        a = rng.uniform(size=(rng.integers(1, 7), 2))
        b = rng.uniform(size=(rng.integers(1, 7), 2))
        assert dtw(a, b) >= 0.0
        assert dtw(a, b) == dtw(b, a)


def test_dtw_matches_bruteforce_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(60):
        a = rng.uniform(size=(int(rng.integers(1, 7)), 2))
        b = rng.uniform(size=(int(rng.integers(1, 7)), 2))
        assert dtw(a, b) == dtw_bruteforce(a, b)


def test_dtw_known_small_case():
    a = np.array([[0.0, 0.0]])
    b = np.array([[3.0, 4.0], [3.0, 4.0]])
    # both b points align to the single a point: cost 10, path length 2
    assert abs(dtw(a, b) - 5.0) < 1e-12


def test_dtw_empty_rejected():
    with pytest.raises(ValidationError):
        dtw(np.zeros((0, 2)), np.zeros((3, 2)))


# --- class average baseline ----------------------------------------------------------

def _item(label, traj_val, bitmap_val, t=8):
    return DatasetItem(label, np.full((t, 2), traj_val), np.full((32, 32), bitmap_val))


def test_baseline_single_item_class_is_item():
    ds = Dataset([_item("A", 0.3, 1.0)])
    avg = class_average_baseline(ds)
    np.testing.assert_array_equal(avg["A"][0], np.full((32, 32), 1.0))
    np.testing.assert_array_equal(avg["A"][1], np.full((8, 2), 0.3))


def test_baseline_two_bitmap_mean():
    ds = Dataset([_item("A", 0.0, 0.0), _item("A", 1.0, 1.0)])
    avg = class_average_baseline(ds)
    np.testing.assert_array_equal(avg["A"][0], np.full((32, 32), 0.5))


def test_baseline_empty_rejected():
    with pytest.raises(ValidationError):
        class_average_baseline(Dataset([]))


# --- evaluate ---------------------------------------------------------------------------

class IdentityModel:
    """Test double: echoes the paired ground truth for every conversion."""

    class _Cfg:
        variant = "test"
        seq_len = 8

    config = _Cfg()

    def __init__(self, dataset):
        self._by_bitmap = [(it.bitmap, it.traj) for it in dataset.items]

    def traj_to_bitmap(self, traj):
        for bm, tr in self._by_bitmap:
            if np.array_equal(tr, traj):
                return bm
        raise AssertionError("unknown trajectory")

    def bitmap_to_traj(self, bitmap):
        for bm, tr in self._by_bitmap:
            if np.array_equal(bm, bitmap):
                return tr
        raise AssertionError("unknown bitmap")


def test_evaluate_identity_model_perfect_scores():
    ds = synth_dataset(1, 3, "AB", t=8)
    ds.split = "test"
    report = evaluate(IdentityModel(ds), ds)
    assert report.n_items == 6
    assert report.psnr_exact_matches == 6
    assert report.psnr_mean == math.inf  # every item exact
    assert report.ssim_mean == 1.0
    assert report.dtw_mean == 0.0


def test_evaluate_report_means_are_arithmetic_means():
    ds = synth_dataset(2, 4, "ABC", t=8)
    avg = class_average_baseline(ds)
    report = evaluate_baseline(avg, ds)
    per_item_ssim = [ssim(it.bitmap, avg[it.label][0]) for it in ds.items]
    per_item_dtw = [dtw(it.traj, avg[it.label][1]) for it in ds.items]
    assert abs(report.ssim_mean - np.mean(per_item_ssim)) < 1e-12
    assert abs(report.dtw_mean - np.mean(per_item_dtw)) < 1e-12
    assert report.n_items == 12
    assert set(report.per_class) == {"A", "B", "C"}


def test_evaluate_empty_rejected():
    ds = synth_dataset(1, 2, "A", t=8)
    with pytest.raises(ValidationError):
        evaluate(IdentityModel(ds), Dataset([]))


def test_report_serialization_field_names():
    report = MetricsReport(
        psnr_mean=10.0, ssim_mean=0.5, dtw_mean=0.1, n_items=3, variant="conv1d",
        per_class={"A": {"psnr": 10.0, "ssim": 0.5, "dtw": 0.1, "n": 3}},
    )
    doc = json.loads(report.to_json())
    assert set(doc) >= {"psnr_mean", "ssim_mean", "dtw_mean", "n_items", "variant", "per_class"}
    assert doc["variant"] == "conv1d"
    assert doc["per_class"]["A"]["n"] == 3


def test_evaluate_thread_env_does_not_change_results(monkeypatch):
    ds = synth_dataset(3, 3, "AB", t=8)
    avg = class_average_baseline(ds)
    monkeypatch.delenv("CROSSVAE_THREADS", raising=False)
    seq = evaluate_baseline(avg, ds)
    monkeypatch.setenv("CROSSVAE_THREADS", "2")
    par = evaluate_baseline(avg, ds)
    assert seq.ssim_mean == par.ssim_mean
    assert seq.dtw_mean == par.dtw_mean
    assert seq.per_class == par.per_class


def test_dtw_zero_sequences_give_zero():
    assert dtw_bruteforce(np.zeros((3, 2)), np.zeros((4, 2))) == 0.0
    assert dtw(np.zeros((3, 2)), np.zeros((4, 2))) == 0.0
