"""Segmentation and image-similarity metrics.

Dice overlap and boundary Hausdorff distance (reported in mm via the
frame's pixel calibration) quantify segmentation quality; SSIM drives
nearest-neighbor retrieval of the most similar corpus images; LV
heatmaps and depth/angle subset reports visualize dataset composition.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve
from scipy.spatial import cKDTree

from .validation import LV, check_same_shape

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def dice(a, b, label=LV):
    """Dice overlap 2|A&B| / (|A| + |B|) for one label; 1.0 if both empty."""
    a, b = check_same_shape(a, b, names=("a", "b"))
    sel_a = a == label
    sel_b = b == label
    denom = int(sel_a.sum()) + int(sel_b.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int((sel_a & sel_b).sum()) / denom


def boundary_points(mask, label=LV):
    """Pixel coordinates of label pixels 4-adjacent to any non-label pixel.

    The canvas border counts as non-label, so shapes touching the edge
    keep their rim.
    """
    sel = np.asarray(mask) == label
    padded = np.pad(sel, 1, mode="constant", constant_values=False)
    interior = (
        padded[:-2, 1:-1]
        & padded[2:, 1:-1]
        & padded[1:-1, :-2]
        & padded[1:-1, 2:]
    )
    return np.argwhere(sel & ~interior).astype(np.float64)


def hausdorff_mm(a, b, label=LV, mm_per_px=1.0):
    """Symmetric Hausdorff distance between boundary-pixel sets, in mm."""
    if mm_per_px <= 0:
        raise ValueError(f"mm_per_px must be > 0, got {mm_per_px}")
    a, b = check_same_shape(a, b, names=("a", "b"))
    pa = boundary_points(a, label)
    pb = boundary_points(b, label)
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError(f"label {label} empty on one side (segmentation failure)")
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return max(d_ab, d_ba) * mm_per_px


def _gaussian_window(size, sigma):
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(x, y, data_range=1.0):
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5).

    Local statistics are Gaussian-weighted moments over fully interior
    window positions; K1 = 0.01, K2 = 0.03.
    """
    x, y = check_same_shape(x, y, names=("x", "y"))
    x = x.astype(np.float64)
    y = y.astype(np.float64)
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels per side")
    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    def smooth(img):
        return convolve(img, w, mode="valid")

    mu_x = smooth(x)
    mu_y = smooth(y)
    var_x = smooth(x * x) - mu_x**2
    var_y = smooth(y * y) - mu_y**2
    cov = smooth(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def most_similar(query, corpus, k, ids=None):
    """Top-k corpus images by SSIM to the query, descending; ties by id order.

    Returns a list of (id, score). k larger than the corpus truncates.
    """
    if len(corpus) == 0:
        raise ValueError("corpus must be nonempty")
    if ids is None:
        ids = list(range(len(corpus)))
    scores = [ssim(query, img) for img in corpus]
    order = sorted(range(len(corpus)), key=lambda i: (-scores[i], i))
    return [(ids[i], scores[i]) for i in order[: max(k, 0)]]


def lv_heatmap(masks, label=LV):
    """Per-pixel fraction of masks containing the label."""
    if len(masks) == 0:
        raise ValueError("need at least one mask")
    shape = np.asarray(masks[0]).shape
    acc = np.zeros(shape, dtype=np.float64)
    for m in masks:
        m = np.asarray(m)
        if m.shape != shape:
            raise ValueError("all masks must share one shape")
        acc += m == label
    return acc / len(masks)


@dataclass
class FrameMetrics:
    """Per-frame evaluation row; None marks a segmentation failure."""

    frame_id: str
    dice: float = None
    hausdorff_mm: float = None
    depth_mm: float = None
    angle_deg: float = None


def _mean_sd(values):
    if len(values) == 0:
        return None, None
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if len(values) > 1 else None
    return mean, sd


def _group_stats(rows):
    dices = [r.dice for r in rows if r.dice is not None]
    hds = [r.hausdorff_mm for r in rows if r.hausdorff_mm is not None]
    dice_mean, dice_sd = _mean_sd(dices)
    hd_mean, hd_sd = _mean_sd(hds)
    return {
        "n": len(rows),
        "n_failed": sum(1 for r in rows if r.dice is None or r.hausdorff_mm is None),
        "dice_mean": dice_mean,
        "dice_sd": dice_sd,
        "hd_mean_mm": hd_mean,
        "hd_sd_mm": hd_sd,
    }


def subset_report(rows, depth_threshold_mm=150.0, angle_threshold_deg=70.0):
    """Metric aggregates over depth / sector-angle subsets.

    Splits the rows into depth below/at-or-above the depth threshold and
    angle below/at-or-above the angle threshold; failed frames count
    toward n but are excluded from the aggregates.
    """
    groups = {
        f"depth_lt_{depth_threshold_mm:g}mm": [r for r in rows if r.depth_mm < depth_threshold_mm],
        f"depth_ge_{depth_threshold_mm:g}mm": [r for r in rows if r.depth_mm >= depth_threshold_mm],
        f"angle_lt_{angle_threshold_deg:g}deg": [r for r in rows if r.angle_deg < angle_threshold_deg],
        f"angle_ge_{angle_threshold_deg:g}deg": [r for r in rows if r.angle_deg >= angle_threshold_deg],
    }
    return {name: _group_stats(members) for name, members in groups.items()}


def write_metrics_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "dice", "hd_mm", "depth_mm", "angle_deg"])
        for r in rows:
            writer.writerow(
                [
                    r.frame_id,
                    "" if r.dice is None else f"{r.dice:.6f}",
                    "" if r.hausdorff_mm is None else f"{r.hausdorff_mm:.6f}",
                    "" if r.depth_mm is None else f"{r.depth_mm:.6f}",
                    "" if r.angle_deg is None else f"{r.angle_deg:.6f}",
                ]
            )


def read_metrics_csv(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                FrameMetrics(
                    frame_id=rec["id"],
                    dice=float(rec["dice"]) if rec["dice"] else None,
                    hausdorff_mm=float(rec["hd_mm"]) if rec["hd_mm"] else None,
                    depth_mm=float(rec["depth_mm"]) if rec["depth_mm"] else None,
                    angle_deg=float(rec["angle_deg"]) if rec["angle_deg"] else None,
                )
            )
    return rows
