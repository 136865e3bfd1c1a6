"""Sector (fan-beam) geometry of cardiac ultrasound frames.

An ultrasound frame is valid only inside a circular wedge that opens
downwards from the transducer tip. The geometry record carries the tip
position in pixels, the physical depth at the sector arc, the opening
angle and the pixel calibration, which is everything the geometric
augmentations and the clinical measurements need.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .validation import check_image, check_label_mask


@dataclass
class SectorGeometry:
    """Geometry of the scan sector within an image.

    Args:
        tip_row, tip_col: sector apex in pixel coordinates (row, col);
            may lie outside the canvas after transforms.
        depth_mm: physical depth at the sector arc, > 0.
        angle_deg: full opening angle in (0, 180], symmetric about the
            sector axis.
        tilt_deg: rotation of the sector axis away from the downward
            vertical (0 for native acquisitions; transforms update it).
        image_size: (H, W) canvas size in pixels.
        mm_per_px: radial pixel calibration. When omitted it is derived
            for the canonical layout where the arc touches the bottom
            edge of the canvas: depth_mm / (H - tip_row).
    """

    tip_row: float
    tip_col: float
    depth_mm: float
    angle_deg: float
    tilt_deg: float = 0.0
    image_size: tuple = (256, 256)
    mm_per_px: float = None

    def __post_init__(self):
        h, w = self.image_size
        if h <= 0 or w <= 0:
            raise ValueError(f"image_size must be positive, got {self.image_size}")
        self.image_size = (int(h), int(w))
        # plain floats throughout (numpy scalars leak in from transforms)
        self.tip_row = float(self.tip_row)
        self.tip_col = float(self.tip_col)
        self.depth_mm = float(self.depth_mm)
        self.angle_deg = float(self.angle_deg)
        self.tilt_deg = float(self.tilt_deg)
        if self.mm_per_px is not None:
            self.mm_per_px = float(self.mm_per_px)
        if not self.depth_mm > 0:
            raise ValueError(f"depth_mm must be > 0, got {self.depth_mm}")
        if not 0.0 < self.angle_deg <= 180.0:
            raise ValueError(f"angle_deg must be in (0, 180], got {self.angle_deg}")
        if self.mm_per_px is None:
            radius = self.image_size[0] - self.tip_row
            if radius <= 0:
                raise ValueError(
                    "cannot derive mm_per_px: tip sits at or below the bottom edge"
                )
            self.mm_per_px = self.depth_mm / radius
        if not self.mm_per_px > 0:
            raise ValueError(f"mm_per_px must be > 0, got {self.mm_per_px}")

    @property
    def tip(self):
        return (self.tip_row, self.tip_col)

    @property
    def bottom_radius_px(self):
        """Pixel distance from the tip to the sector arc."""
        return self.depth_mm / self.mm_per_px

    def axis_direction(self):
        """Unit (row, col) vector of the sector axis (tilt 0 = straight down)."""
        t = np.deg2rad(self.tilt_deg)
        return (np.cos(t), np.sin(t))

    def copy(self):
        return replace(self)


def points_in_sector(geometry, rows, cols):
    """Vectorized point-in-sector test for continuous pixel coordinates.

    A point is inside iff its distance from the tip is at most the arc
    radius and its angle from the sector axis is at most half the
    opening angle (both bounds inclusive).
    """
    rows = np.asarray(rows, dtype=np.float64)
    cols = np.asarray(cols, dtype=np.float64)
    dr = rows - geometry.tip_row
    dc = cols - geometry.tip_col
    dist = np.hypot(dr, dc)
    ar, ac = geometry.axis_direction()
    dot = dr * ar + dc * ac
    cross = ar * dc - ac * dr
    ang = np.abs(np.degrees(np.arctan2(cross, dot)))
    return (dist <= geometry.bottom_radius_px) & (ang <= geometry.angle_deg / 2.0)


def sector_mask(geometry):
    """Binary mask of pixels whose centers lie inside the sector."""
    h, w = geometry.image_size
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return points_in_sector(geometry, rows, cols)


@dataclass
class Frame:
    """An image with optional labels and its sector geometry.

    ``source_mask`` is populated by the geometric transforms: it flags
    pixels whose value originates from inside the input frame's sector
    (as opposed to synthesized-black regions). The repaint-mask
    computation relies on it instead of intensity thresholding, so true
    black anatomy is never mistaken for a missing region.
    """

    image: np.ndarray
    mask: np.ndarray = None
    geometry: SectorGeometry = None
    source_mask: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.image = check_image(self.image)
        if self.geometry is None:
            raise ValueError("Frame requires a SectorGeometry")
        if self.image.shape != self.geometry.image_size:
            raise ValueError(
                f"image shape {self.image.shape} does not match geometry "
                f"image_size {self.geometry.image_size}"
            )
        if self.mask is not None:
            self.mask = check_label_mask(self.mask, shape=self.image.shape)
        if self.source_mask is not None:
            self.source_mask = np.asarray(self.source_mask, dtype=bool)
            if self.source_mask.shape != self.image.shape:
                raise ValueError("source_mask shape does not match image")

    @property
    def shape(self):
        return self.image.shape

    def copy(self):
        return Frame(
            image=self.image.copy(),
            mask=None if self.mask is None else self.mask.copy(),
            geometry=self.geometry.copy(),
            source_mask=None if self.source_mask is None else self.source_mask.copy(),
        )
