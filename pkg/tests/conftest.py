"""Shared fixtures: synthetic sector frames with plausible label layouts."""

import numpy as np
import pytest
from scipy import ndimage

from echoaug.geometry import Frame, SectorGeometry, sector_mask
from echoaug.validation import LA, LV, MYO


def make_geometry(
    tip=(8.0, 128.0),
    depth_mm=120.0,
    angle_deg=75.0,
    size=(256, 256),
    radius_px=None,
):
    """Sector geometry; radius_px overrides the canonical bottom-arc layout."""
    mm_per_px = None if radius_px is None else depth_mm / radius_px
    return SectorGeometry(
        tip_row=tip[0],
        tip_col=tip[1],
        depth_mm=depth_mm,
        angle_deg=angle_deg,
        image_size=size,
        mm_per_px=mm_per_px,
    )


def _ellipse(shape, center, semi_axes):
    rows, cols = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
    return ((rows - center[0]) / semi_axes[0]) ** 2 + (
        (cols - center[1]) / semi_axes[1]
    ) ** 2 <= 1.0


def make_labels(geometry, lv_center=None, lv_axes=(26.0, 16.0)):
    """LV ellipse wrapped by a MYO ring with an LA cap below, inside the sector."""
    h, w = geometry.image_size
    if lv_center is None:
        lv_center = (geometry.tip_row + 0.45 * geometry.bottom_radius_px, geometry.tip_col)
    lv = _ellipse((h, w), lv_center, lv_axes)
    myo = _ellipse((h, w), lv_center, (lv_axes[0] + 7, lv_axes[1] + 7)) & ~lv
    la_center = (lv_center[0] + lv_axes[0] + 9, lv_center[1])
    la = _ellipse((h, w), la_center, (12.0, 10.0)) & ~lv & ~myo
    mask = np.zeros((h, w), dtype=np.uint8)
    sector = sector_mask(geometry)
    mask[myo & sector] = MYO
    mask[la & sector] = LA
    mask[lv & sector] = LV
    return mask


def make_frame(geometry=None, seed=0, with_mask=True):
    """Smooth pseudo-speckle content restricted to the sector."""
    geometry = geometry or make_geometry()
    h, w = geometry.image_size
    rng = np.random.default_rng(seed)
    coarse = rng.random((h // 16, w // 16))
    field = ndimage.zoom(coarse, 16, order=3)[:h, :w]
    field = 0.15 + 0.7 * (field - field.min()) / (field.max() - field.min() + 1e-12)
    image = field * sector_mask(geometry)
    mask = make_labels(geometry) if with_mask else None
    return Frame(image=np.clip(image, 0.0, 1.0), mask=mask, geometry=geometry)


@pytest.fixture
def small_frame():
    geom = make_geometry(tip=(4.0, 32.0), depth_mm=60.0, angle_deg=70.0, size=(64, 64))
    return make_frame(geom, seed=3)


@pytest.fixture
def default_frame():
    return make_frame(seed=1)
