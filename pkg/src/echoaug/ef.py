"""Ejection fraction from segmented ED/ES frames.

LV volumes come from the biplane method of discs: the LV long axis is
measured in the apical 2- and 4-chamber views, 20 slabs perpendicular
to the axis supply one diameter per view, and each slab contributes an
elliptical disc. EF = (EDV - ESV) / EDV, averaged over every cycle
pairing of the two views. Exams where no cycle pair yields a volume are
omitted and counted against feasibility. Agreement with a manual
reference is summarized with Bland-Altman statistics.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .validation import LA, LV

N_DISCS = 20
MIN_LV_PIXELS = 50
DEPTH_LIMIT_MM = 150.0
ANGLE_LIMIT_DEG = 70.0


class SegmentationFailure(ValueError):
    """The mask does not support a volume measurement."""


@dataclass
class DiscStack:
    """Long-axis length and perpendicular LV diameters for one view."""

    long_axis_mm: float
    diameters_mm: np.ndarray

    def __post_init__(self):
        self.diameters_mm = np.asarray(self.diameters_mm, dtype=np.float64)
        if self.long_axis_mm <= 0:
            raise ValueError(f"long axis must be > 0, got {self.long_axis_mm}")
        if np.any(self.diameters_mm < 0):
            raise ValueError("diameters must be >= 0")


@dataclass
class PhaseFrame:
    """One segmented frame (ED or ES) with its geometry."""

    mask: np.ndarray
    geometry: object


@dataclass
class Cycle:
    ed: PhaseFrame
    es: PhaseFrame


@dataclass
class ExamRecord:
    patient_id: str
    a2c: list
    a4c: list
    manual_ef: float = None


@dataclass
class PairEF:
    a2c_index: int
    a4c_index: int
    edv_ml: float
    esv_ml: float
    ef: float


@dataclass
class EFResult:
    patient_id: str
    ef: float = None
    n_pairs: int = 0
    pairs: list = field(default_factory=list)
    failed: bool = False
    failures: list = field(default_factory=list)
    manual_ef: float = None
    out_of_range: bool = None


def _la_adjacent_boundary(lv, mask):
    la = np.asarray(mask) == LA
    if not la.any():
        return np.zeros_like(lv)
    padded = np.pad(la, 1, mode="constant", constant_values=False)
    la_neighbor = (
        padded[:-2, 1:-1] | padded[2:, 1:-1] | padded[1:-1, :-2] | padded[1:-1, 2:]
    )
    return lv & la_neighbor


def _chord_midpoint(points):
    """Midpoint of the longest chord within a small point set."""
    if len(points) == 1:
        return points[0].astype(np.float64)
    diffs = points[:, None, :] - points[None, :, :]
    d2 = (diffs**2).sum(axis=-1)
    i, j = np.unravel_index(np.argmax(d2), d2.shape)
    return (points[i] + points[j]) / 2.0


def extract_discs(mask, geometry, n_discs=N_DISCS, min_lv_pixels=MIN_LV_PIXELS):
    """Disc diameters of the LV along its long axis.

    The base is the midpoint of the LV boundary chord adjacent to the LA
    label; without an LA label it falls back to the chord across the
    lowest LV extent. The apex is the centroid of the LV pixels farthest
    from the base midpoint. Lengths follow the pixel-footprint
    convention (a w-pixel-wide row spans w pixels), so axis-aligned
    rectangles measure exactly.
    """
    lv = np.asarray(mask) == LV
    n_lv = int(lv.sum())
    if n_lv < min_lv_pixels:
        raise SegmentationFailure(
            f"only {n_lv} LV pixels (< {min_lv_pixels}); cannot measure volume"
        )
    pts = np.argwhere(lv).astype(np.float64)

    base_band = _la_adjacent_boundary(lv, mask)
    if base_band.any():
        base_mid = _chord_midpoint(np.argwhere(base_band).astype(np.float64))
    else:
        bottom = pts[:, 0].max()
        row_pts = pts[pts[:, 0] == bottom]
        base_mid = np.array([bottom, (row_pts[:, 1].min() + row_pts[:, 1].max()) / 2.0])

    d2 = ((pts - base_mid) ** 2).sum(axis=1)
    far = d2 >= d2.max() - 1e-9
    apex = pts[far].mean(axis=0)

    span = float(np.linalg.norm(apex - base_mid))
    if span <= 0:
        raise SegmentationFailure("degenerate LV shape: apex coincides with base")
    axis_len_px = span + 1.0
    u = (apex - base_mid) / span
    n = np.array([-u[1], u[0]])

    along = (pts - base_mid) @ u + 0.5
    across = (pts - base_mid) @ n
    slab = np.clip((along / (axis_len_px / n_discs)).astype(int), 0, n_discs - 1)
    diameters = np.zeros(n_discs)
    for i in range(n_discs):
        sel = slab == i
        if sel.any():
            diameters[i] = across[sel].max() - across[sel].min() + 1.0
    mm = geometry.mm_per_px
    return DiscStack(long_axis_mm=axis_len_px * mm, diameters_mm=diameters * mm)


def biplane_volume(a2c, a4c):
    """Biplane disc-summation volume in mL.

    V = (pi/4) * sum(a_i * b_i) * L / n with L the longer of the two
    long axes, in mm^3 converted to mL.
    """
    if len(a2c.diameters_mm) != len(a4c.diameters_mm):
        raise ValueError("disc stacks must have the same number of discs")
    n = len(a2c.diameters_mm)
    length = max(a2c.long_axis_mm, a4c.long_axis_mm)
    v_mm3 = math.pi / 4.0 * float(np.sum(a2c.diameters_mm * a4c.diameters_mm)) * length / n
    return v_mm3 / 1000.0


def ef_fraction(edv_ml, esv_ml):
    """EF = (EDV - ESV) / EDV as a fraction."""
    if edv_ml <= 0:
        raise ValueError(f"EDV must be > 0, got {edv_ml}")
    return (edv_ml - esv_ml) / edv_ml


def _cycle_discs(cycles, failures, view):
    out = []
    for i, cyc in enumerate(cycles):
        try:
            out.append((i, extract_discs(cyc.ed.mask, cyc.ed.geometry),
                        extract_discs(cyc.es.mask, cyc.es.geometry)))
        except SegmentationFailure as exc:
            failures.append(f"{view} cycle {i}: {exc}")
    return out


def exam_ef(exam):
    """EF for one exam: every A2C cycle paired with every A4C cycle.

    Pair EFs are averaged with equal weight. If no valid pair exists the
    exam is a no-EF outcome (failed=True) and counts against feasibility.
    """
    failures = []
    a2c = _cycle_discs(exam.a2c, failures, "A2C")
    a4c = _cycle_discs(exam.a4c, failures, "A4C")
    pairs = []
    for i, ed2, es2 in a2c:
        for j, ed4, es4 in a4c:
            edv = biplane_volume(ed2, ed4)
            esv = biplane_volume(es2, es4)
            try:
                ef = ef_fraction(edv, esv)
            except ValueError as exc:
                failures.append(f"pair ({i},{j}): {exc}")
                continue
            pairs.append(PairEF(a2c_index=i, a4c_index=j, edv_ml=edv, esv_ml=esv, ef=ef))
    if not pairs:
        return EFResult(
            patient_id=exam.patient_id,
            failed=True,
            failures=failures,
            manual_ef=exam.manual_ef,
        )
    result = EFResult(
        patient_id=exam.patient_id,
        ef=float(np.mean([p.ef for p in pairs])),
        n_pairs=len(pairs),
        pairs=pairs,
        failures=failures,
        manual_ef=exam.manual_ef,
    )
    result.out_of_range = is_out_of_range(exam)
    return result


def is_out_of_range(exam, depth_limit_mm=DEPTH_LIMIT_MM, angle_limit_deg=ANGLE_LIMIT_DEG):
    """True iff any frame of the exam exceeds the acquisition normal range.

    Strict inequalities: depth > 150 mm or sector angle > 70 degrees; a
    frame exactly at the limits is in range.
    """
    for cycles in (exam.a2c, exam.a4c):
        for cyc in cycles:
            for phase in (cyc.ed, cyc.es):
                geom = phase.geometry
                if geom is None:
                    raise ValueError(f"exam {exam.patient_id}: frame without geometry")
                if geom.depth_mm > depth_limit_mm or geom.angle_deg > angle_limit_deg:
                    return True
    return False


@dataclass
class BlandAltmanStats:
    bias: float
    loa_low: float
    loa_high: float
    n: int
    sd: float


def bland_altman(pairs):
    """Bias and 95% limits of agreement for (auto, manual) value pairs.

    Differences are auto - manual; limits are bias +/- 1.96 sample
    standard deviations.
    """
    if len(pairs) < 2:
        raise ValueError(f"need at least 2 pairs, got {len(pairs)}")
    diffs = np.array([a - m for a, m in pairs], dtype=np.float64)
    bias = float(diffs.mean())
    sd = float(diffs.std(ddof=1))
    return BlandAltmanStats(
        bias=bias,
        loa_low=bias - 1.96 * sd,
        loa_high=bias + 1.96 * sd,
        n=len(pairs),
        sd=sd,
    )


def feasibility(n_computed, n_total):
    """Fraction of exams with an EF value; computed + omitted = total."""
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    if n_computed > n_total:
        raise ValueError("computed exams exceed total")
    return n_computed / n_total
