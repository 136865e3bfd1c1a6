"""Reading and writing frame records.

A record is a triplet sharing one stem: ``<stem>_img.png`` (8-bit
grayscale intensities), ``<stem>_msk.png`` (8-bit class-coded labels,
optional) and ``<stem>_meta.txt`` (UTF-8 key=value sidecar with the
sector geometry).
"""

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .geometry import Frame, SectorGeometry

META_KEYS = ("tip_row", "tip_col", "depth_mm", "angle_deg", "mm_per_px")


def save_image_png(path, pixels):
    """Write a [0, 1] float image as 8-bit grayscale PNG."""
    data = np.clip(np.round(np.asarray(pixels) * 255.0), 0, 255).astype(np.uint8)
    PILImage.fromarray(data, mode="L").save(path)


def load_image_png(path):
    """Read an 8-bit grayscale PNG as a [0, 1] float image."""
    with PILImage.open(path) as im:
        data = np.asarray(im.convert("L"), dtype=np.float64)
    return data / 255.0


def save_mask_png(path, classes):
    PILImage.fromarray(np.asarray(classes, dtype=np.uint8), mode="L").save(path)


def load_mask_png(path):
    with PILImage.open(path) as im:
        return np.asarray(im, dtype=np.uint8)


def save_metadata(path, geometry):
    lines = [
        f"tip_row={float(geometry.tip_row)!r}",
        f"tip_col={float(geometry.tip_col)!r}",
        f"depth_mm={float(geometry.depth_mm)!r}",
        f"angle_deg={float(geometry.angle_deg)!r}",
        f"mm_per_px={float(geometry.mm_per_px)!r}",
        f"tilt_deg={float(geometry.tilt_deg)!r}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_metadata(path, image_size=(256, 256)):
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, raw = line.partition("=")
        values[key.strip()] = float(raw.strip())
    missing = [k for k in META_KEYS if k not in values]
    if missing:
        raise ValueError(f"{path}: missing metadata keys {missing}")
    return SectorGeometry(
        tip_row=values["tip_row"],
        tip_col=values["tip_col"],
        depth_mm=values["depth_mm"],
        angle_deg=values["angle_deg"],
        tilt_deg=values.get("tilt_deg", 0.0),
        image_size=image_size,
        mm_per_px=values["mm_per_px"],
    )


def save_frame(directory, stem, frame):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_image_png(directory / f"{stem}_img.png", frame.image)
    if frame.mask is not None:
        save_mask_png(directory / f"{stem}_msk.png", frame.mask)
    save_metadata(directory / f"{stem}_meta.txt", frame.geometry)


def load_frame(directory, stem):
    directory = Path(directory)
    image = load_image_png(directory / f"{stem}_img.png")
    mask_path = directory / f"{stem}_msk.png"
    mask = load_mask_png(mask_path) if mask_path.exists() else None
    geometry = load_metadata(directory / f"{stem}_meta.txt", image_size=image.shape)
    return Frame(image=image, mask=mask, geometry=geometry)


def list_frame_stems(directory):
    """Stems of all frame records in a directory, sorted."""
    directory = Path(directory)
    if not directory.is_dir():
        return []
    return sorted(
        p.name[: -len("_img.png")]
        for p in directory.glob("*_img.png")
        if p.is_file()
    )
