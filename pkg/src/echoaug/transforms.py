"""Randomized geometric transforms for sector frames.

Four augmentation families reposition an annotated sector: depth
increase (pad black rows at the bottom, rescale back to the canvas),
tilt (rigid rotation about the tip), sector-width scaling (horizontal
stretch/squeeze about the tip column) and translation. A combination
family applies each of the four with an independent 50% chance, always
in the fixed order depth -> tilt -> width -> translation so a given
seed reproduces the same output.

Every active sub-transform is an affine map; the composition is applied
with a single resampling pass (bilinear for intensities, nearest
neighbor for labels, so label values stay integral). Pixels with no
source are exactly 0.0, and a boolean source map records which output
pixels carry content from inside the input sector.

The module also hosts the two preprocessing transforms used to diversify
a diffusion-model training set: sector narrowing with re-stretching, and
gap-based frame subsampling.
"""

import hashlib
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .geometry import Frame, points_in_sector, sector_mask
from .validation import check_in_range

AUGMENTATION_KINDS = (
    "depth_increase",
    "tilt",
    "sector_width",
    "translation",
    "combination",
    "identity",
)

DEPTH_RANGE = (0.0, 150.0)  # pixels, closed
TILT_RANGE = (-30.0, 30.0)  # degrees, open
WIDTH_RANGE = (0.5, 1.5)  # factor, open
TRANSLATE_RANGE = (0.0, 50.0)  # pixels, open
SUBSAMPLE_GAP = (8, 12)  # frames, closed
MAX_NARROW_DEG = 20.0


@dataclass
class AugmentationSpec:
    """Parameters of one sampled augmentation.

    Single-kind specs use exactly one parameter set; ``combination``
    uses the four ``apply_*`` flags to select sub-transforms. Inactive
    parameters keep their neutral defaults and are not range-checked.
    """

    kind: str
    depth_px: float = 0.0
    tilt_deg: float = 0.0
    width_factor: float = 1.0
    translate_len: float = 0.0
    translate_angle: float = 0.0
    apply_depth: bool = False
    apply_tilt: bool = False
    apply_width: bool = False
    apply_translation: bool = False

    def active_kinds(self):
        """Sub-transforms to run, in canonical application order."""
        if self.kind == "identity":
            return []
        if self.kind == "combination":
            flags = (
                self.apply_depth,
                self.apply_tilt,
                self.apply_width,
                self.apply_translation,
            )
            names = ("depth_increase", "tilt", "sector_width", "translation")
            return [n for n, f in zip(names, flags) if f]
        return [self.kind]

    def validate(self):
        if self.kind not in AUGMENTATION_KINDS:
            raise ValueError(f"unknown augmentation kind {self.kind!r}")
        active = self.active_kinds()
        if "depth_increase" in active:
            check_in_range(self.depth_px, *DEPTH_RANGE, "depth_px")
        if "tilt" in active:
            check_in_range(self.tilt_deg, *TILT_RANGE, "tilt_deg", inclusive=(False, False))
        if "sector_width" in active:
            check_in_range(
                self.width_factor, *WIDTH_RANGE, "width_factor", inclusive=(False, False)
            )
        if "translation" in active:
            check_in_range(
                self.translate_len, *TRANSLATE_RANGE, "translate_len", inclusive=(False, False)
            )
            check_in_range(self.translate_angle, 0.0, 360.0, "translate_angle", inclusive=(True, False))
        return self


def _uniform_open(rng, lo, hi):
    # uniform(lo, hi) may return lo exactly; redraw so open intervals stay open
    x = rng.uniform(lo, hi)
    while not lo < x < hi:
        x = rng.uniform(lo, hi)
    return x


def sample_spec(kind, rng):
    """Draw one augmentation spec with parameters uniform over their ranges.

    Combination flags are four independent fair coins; all four parameter
    sets are drawn regardless of the flags so the RNG stream advances by
    a fixed amount per call.
    """
    if kind not in AUGMENTATION_KINDS:
        raise ValueError(f"unknown augmentation kind {kind!r}")
    if kind == "identity":
        return AugmentationSpec(kind="identity")
    flags = rng.random(4) < 0.5 if kind == "combination" else np.zeros(4, dtype=bool)
    spec = AugmentationSpec(
        kind=kind,
        depth_px=rng.uniform(*DEPTH_RANGE),
        tilt_deg=_uniform_open(rng, *TILT_RANGE),
        width_factor=_uniform_open(rng, *WIDTH_RANGE),
        translate_len=_uniform_open(rng, *TRANSLATE_RANGE),
        translate_angle=rng.uniform(0.0, 360.0),
        apply_depth=bool(flags[0]),
        apply_tilt=bool(flags[1]),
        apply_width=bool(flags[2]),
        apply_translation=bool(flags[3]),
    )
    return spec.validate()


def _rotation(theta_deg):
    t = np.deg2rad(theta_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s], [s, c]])


def _compose(a2, b2, a1, b1):
    """Compose affine maps: apply (a1, b1) first, then (a2, b2)."""
    return a2 @ a1, a2 @ b1 + b2


def _atan_scaled(angle_deg, factor):
    """Angle of a direction whose tangent is scaled by ``factor``."""
    return np.degrees(np.arctan(factor * np.tan(np.deg2rad(angle_deg))))


def _depth_affine(geom, lam):
    h = geom.image_size[0]
    k = (h + lam) / h
    a = np.array([[1.0 / k, 0.0], [0.0, 1.0]])
    b = np.zeros(2)
    # Vertical squeeze widens the apparent fan; the target sector is
    # re-anchored to the canvas bottom, which the repaint re-completes.
    new = replace(
        geom,
        tip_row=geom.tip_row / k,
        depth_mm=geom.depth_mm * k,
        angle_deg=min(2.0 * _atan_scaled(geom.angle_deg / 2.0, k), 180.0),
        tilt_deg=_atan_scaled(geom.tilt_deg, k),
        mm_per_px=None,
    )
    return a, b, new


def _tilt_affine(geom, theta):
    rot = _rotation(theta)
    tip = np.array(geom.tip)
    return rot, tip - rot @ tip, replace(geom, tilt_deg=geom.tilt_deg + theta)


def _width_affine(geom, factor):
    a = np.array([[1.0, 0.0], [0.0, factor]])
    b = np.array([0.0, geom.tip_col - factor * geom.tip_col])
    new = replace(
        geom,
        angle_deg=min(2.0 * _atan_scaled(geom.angle_deg / 2.0, factor), 180.0),
        tilt_deg=_atan_scaled(geom.tilt_deg, factor),
    )
    return a, b, new


def _translation_affine(geom, length, angle_deg):
    t = np.deg2rad(angle_deg)
    b = np.array([length * np.sin(t), length * np.cos(t)])
    return np.eye(2), b, replace(geom, tip_row=geom.tip_row + b[0], tip_col=geom.tip_col + b[1])


def _resample(frame, fwd_a, fwd_b, geom_out):
    """Resample a frame through the forward affine (source -> target)."""
    h, w = frame.shape
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    grid = np.stack([rows.ravel(), cols.ravel()]).astype(np.float64)
    src = np.linalg.solve(fwd_a, grid - fwd_b[:, None])
    src_r = src[0].reshape(h, w)
    src_c = src[1].reshape(h, w)

    image = ndimage.map_coordinates(frame.image, [src_r, src_c], order=1, cval=0.0)
    image = np.clip(image, 0.0, 1.0)
    mask = None
    if frame.mask is not None:
        mask = ndimage.map_coordinates(frame.mask, [src_r, src_c], order=0, cval=0)

    in_canvas = (src_r >= 0) & (src_r <= h - 1) & (src_c >= 0) & (src_c <= w - 1)
    sourced = in_canvas & points_in_sector(frame.geometry, src_r, src_c)
    return Frame(image=image, mask=mask, geometry=geom_out, source_mask=sourced)


def apply_transform(frame, spec):
    """Apply one augmentation spec to a frame.

    Returns a new frame with consistently updated geometry and a
    populated ``source_mask``. An identity spec returns a bit-identical
    copy (no resampling).
    """
    spec.validate()
    active = spec.active_kinds()
    if not active:
        out = frame.copy()
        out.source_mask = sector_mask(frame.geometry)
        return out

    geom = frame.geometry
    a_total, b_total = np.eye(2), np.zeros(2)
    for kind in active:
        if kind == "depth_increase":
            a, b, geom = _depth_affine(geom, spec.depth_px)
        elif kind == "tilt":
            a, b, geom = _tilt_affine(geom, spec.tilt_deg)
        elif kind == "sector_width":
            a, b, geom = _width_affine(geom, spec.width_factor)
        else:
            a, b, geom = _translation_affine(geom, spec.translate_len, spec.translate_angle)
        a_total, b_total = _compose(a, b, a_total, b_total)
    return _resample(frame, a_total, b_total, geom)


def _mask_col_extent(mask):
    cols = np.where(mask.any(axis=0))[0]
    if cols.size == 0:
        raise ValueError("sector mask is empty")
    return cols[-1] - cols[0] + 1


@dataclass
class NarrowResult:
    frame: Frame
    pre_stretch_angle_deg: float
    stretch_factor: float


def narrow_sector_preproc(frame, delta_deg=None, rng=None):
    """Narrow the sector angle and stretch the cut sector back to full width.

    Peripheral scan lines beyond the narrowed angle are discarded (set
    black), then the remaining sector is stretched horizontally about
    the tip column so it spans the original sector's horizontal extent.
    Used to diversify sector widths in a diffusion-model training set;
    not one of the generative augmentations.

    ``delta_deg`` may be omitted, in which case it is drawn uniformly
    from [0, 20] degrees using ``rng``.
    """
    if delta_deg is None:
        if rng is None:
            raise ValueError("either delta_deg or rng is required")
        delta_deg = rng.uniform(0.0, MAX_NARROW_DEG)
    check_in_range(delta_deg, 0.0, MAX_NARROW_DEG, "delta_deg")
    geom = frame.geometry
    if delta_deg > geom.angle_deg - 5.0:
        raise ValueError(
            f"delta_deg={delta_deg} would collapse the {geom.angle_deg} degree sector"
        )

    narrowed = replace(geom, angle_deg=geom.angle_deg - delta_deg)
    full_mask = sector_mask(geom)
    cut_mask = sector_mask(narrowed)
    stretch = _mask_col_extent(full_mask) / _mask_col_extent(cut_mask)

    cut = Frame(
        image=frame.image * cut_mask,
        mask=None if frame.mask is None else frame.mask * cut_mask,
        geometry=narrowed,
    )
    a, b, _ = _width_affine(narrowed, stretch)
    # the re-widened angle is chosen so the output sector spans the
    # original horizontal extent (arc-extent convention: the stretched
    # arc widens by the stretch factor, extent = 2 R sin(half))
    half = np.deg2rad(narrowed.angle_deg / 2.0)
    rewidened = 2.0 * np.degrees(np.arcsin(np.clip(stretch * np.sin(half), -1.0, 1.0)))
    geom_out = replace(
        narrowed,
        angle_deg=rewidened,
        tilt_deg=_atan_scaled(narrowed.tilt_deg, stretch),
    )
    out = _resample(cut, a, b, geom_out)
    final_mask = sector_mask(geom_out)
    out.image = out.image * final_mask
    if out.mask is not None:
        out.mask = out.mask * final_mask
    out.source_mask = out.source_mask & final_mask
    return NarrowResult(
        frame=out,
        pre_stretch_angle_deg=narrowed.angle_deg,
        stretch_factor=stretch,
    )


def subsample_indices(n_frames, rng):
    """Indices of frames kept when thinning a recording.

    Starts at 0; each successive gap is drawn uniformly from {8..12}
    (per step, for more variety across a recording).
    """
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    indices = [0]
    t = 0
    while True:
        t += int(rng.integers(SUBSAMPLE_GAP[0], SUBSAMPLE_GAP[1] + 1))
        if t >= n_frames:
            break
        indices.append(t)
    return indices


def rng_stream(master_seed, source_id, variant_index):
    """Deterministic per-variant RNG stream.

    Derived from (master seed, source id, variant index) so a failed
    variant never shifts the randomness of its siblings. The id is
    hashed with SHA-256 to stay stable across processes and platforms.
    """
    digest = hashlib.sha256(str(source_id).encode("utf-8")).digest()
    id_key = int.from_bytes(digest[:8], "big")
    seq = np.random.SeedSequence([int(master_seed), id_key, int(variant_index)])
    return np.random.default_rng(seq)
