"""Input validation helpers shared across the package."""

import numpy as np

#: Segmentation class codes used throughout: background, LV lumen,
#: myocardium, left atrium.
BACKGROUND, LV, MYO, LA = 0, 1, 2, 3
VALID_LABELS = (BACKGROUND, LV, MYO, LA)


def check_image(pixels, name="image"):
    """Validate a grayscale intensity image.

    Accepts any array-like, returns a float64 array with values in [0, 1].
    """
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} values must lie in [0, 1]")
    return arr


def check_label_mask(classes, shape=None, name="mask"):
    """Validate a class-coded label mask (values in {0, 1, 2, 3})."""
    arr = np.asarray(classes)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name} shape {arr.shape} does not match {tuple(shape)}")
    arr = arr.astype(np.uint8, casting="unsafe")
    if not np.isin(arr, VALID_LABELS).all():
        bad = sorted(set(np.unique(arr)) - set(VALID_LABELS))
        raise ValueError(f"{name} contains invalid class values {bad}")
    return arr


def check_keep_mask(mask, shape, require_synth=True, name="keep_mask"):
    """Validate a binary keep mask (1 = preserve, 0 = synthesize).

    ``require_synth`` enforces at least one 0 pixel, without which
    inpainting would be a no-op.
    """
    arr = np.asarray(mask)
    if arr.shape != tuple(shape):
        raise ValueError(f"{name} shape {arr.shape} does not match {tuple(shape)}")
    arr = (arr > 0).astype(np.uint8)
    if require_synth and arr.all():
        raise ValueError(f"{name} has no pixels to synthesize")
    return arr


def check_same_shape(a, b, names=("a", "b")):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"{names[0]} shape {a.shape} != {names[1]} shape {b.shape}")
    return a, b


def check_in_range(value, lo, hi, name, inclusive=(True, True)):
    """Range check with configurable endpoint inclusion."""
    ok_lo = value >= lo if inclusive[0] else value > lo
    ok_hi = value <= hi if inclusive[1] else value < hi
    if not (ok_lo and ok_hi):
        lb = "[" if inclusive[0] else "("
        rb = "]" if inclusive[1] else ")"
        raise ValueError(f"{name}={value} outside {lb}{lo}, {hi}{rb}")
    return float(value)
