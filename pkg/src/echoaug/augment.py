"""Generative augmentation pipeline.

One augmented variant is produced in three stages: the frame is
geometrically transformed; pixels without content from the original
sector are turned black; and the black in-sector pixels are synthesized
by masked diffusion inpainting, re-creating a complete sector. Label
masks move rigidly with the kept content and are never repainted, so
annotation subtleties survive untouched.

``GenerativeAugmenter`` wraps the pipeline in a scikit-learn style
estimator so it composes with the wider ecosystem.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import frame_io
from .diffusion import cosine_schedule
from .geometry import Frame, sector_mask
from .repaint import RePaintConfig, inpaint
from .transforms import AugmentationSpec, apply_transform, rng_stream, sample_spec

log = logging.getLogger(__name__)

#: families accepted by the dataset builder; "no-repaint" runs the
#: combination transforms but leaves the vacated regions black
DATASET_FAMILIES = ("depth", "tilt", "width", "translation", "combination", "no-repaint")

_FAMILY_TO_KIND = {
    "depth": "depth_increase",
    "tilt": "tilt",
    "width": "sector_width",
    "translation": "translation",
    "combination": "combination",
    "no-repaint": "combination",
}


@dataclass
class AugmentedRecord:
    """One output variant; variant_index 0 is the untouched original."""

    source_id: str
    variant_index: int
    spec: AugmentationSpec
    frame: Frame
    keep_mask: np.ndarray


def compute_repaint_mask(transformed):
    """Keep mask for a transformed frame: 1 = preserve, 0 = synthesize.

    Synthesized pixels are exactly the in-sector pixels of the
    transformed geometry that carry no content from the original sector
    (per the transform's source tracking, not intensity thresholding).
    Pixels outside the target sector are kept black.
    """
    if transformed.source_mask is None:
        raise ValueError(
            "frame has no source tracking; compute_repaint_mask requires a "
            "frame produced by apply_transform"
        )
    target = sector_mask(transformed.geometry)
    synthesize = target & ~transformed.source_mask
    return (~synthesize).astype(np.uint8)


def _blacken_unsourced(transformed):
    """Zero content (and labels) outside the target sector or without source."""
    target = sector_mask(transformed.geometry)
    content = target & transformed.source_mask
    transformed.image = transformed.image * content
    if transformed.mask is not None:
        transformed.mask = transformed.mask * content
    return transformed


def original_record(frame, source_id):
    """Variant 0: identity spec, full keep mask."""
    return AugmentedRecord(
        source_id=source_id,
        variant_index=0,
        spec=AugmentationSpec(kind="identity"),
        frame=frame.copy(),
        keep_mask=np.ones(frame.shape, dtype=np.uint8),
    )


def augment_frame(
    frame,
    denoiser,
    schedule,
    repaint_config,
    master_seed,
    source_id="frame",
    family="combination",
    n_variants=5,
    repaint=True,
):
    """Produce ``n_variants`` augmented variants of one labeled frame.

    Each variant draws an independent spec from its own RNG stream, so a
    failed variant does not shift the randomness of the others. Returns
    (records, failures) where failures is a list of (variant_index,
    message) for variants whose inpainting failed.
    """
    if family not in DATASET_FAMILIES:
        raise ValueError(f"family must be one of {DATASET_FAMILIES}, got {family!r}")
    kind = _FAMILY_TO_KIND[family]
    records, failures = [], []
    for k in range(1, n_variants + 1):
        rng = rng_stream(master_seed, source_id, k)
        spec = sample_spec(kind, rng)
        try:
            transformed = apply_transform(frame, spec)
            keep = compute_repaint_mask(transformed)
            _blacken_unsourced(transformed)
            if repaint and family != "no-repaint" and not keep.all():
                transformed.image = inpaint(
                    schedule, denoiser, transformed.image, keep, repaint_config, rng
                )
            records.append(
                AugmentedRecord(
                    source_id=source_id,
                    variant_index=k,
                    spec=spec,
                    frame=transformed,
                    keep_mask=keep,
                )
            )
        except Exception as exc:  # noqa: BLE001 - variant isolation
            log.warning("variant %d of %s failed: %s", k, source_id, exc)
            failures.append((k, str(exc)))
    return records, failures


def augment_dataset(
    input_dir,
    output_dir,
    denoiser,
    schedule,
    repaint_config,
    master_seed,
    family="combination",
    n_variants=5,
    workers=1,
):
    """Augment every frame record of a directory.

    Writes the original plus ``n_variants`` variants per input record as
    ``<id>_v<k>_img.png`` / ``_msk.png`` / ``_meta.txt``. Unreadable
    records are skipped and logged. Returns a summary dict.
    """
    started = time.monotonic()
    stems = frame_io.list_frame_stems(input_dir)
    summary = {
        "inputs": 0,
        "outputs": 0,
        "failed_variants": 0,
        "skipped_records": 0,
        "wall_time_s": 0.0,
    }

    def process(stem):
        try:
            frame = frame_io.load_frame(input_dir, stem)
        except Exception as exc:  # noqa: BLE001 - unreadable record
            log.warning("skipping unreadable record %s: %s", stem, exc)
            return stem, None, None
        records, failures = augment_frame(
            frame,
            denoiser,
            schedule,
            repaint_config,
            master_seed,
            source_id=stem,
            family=family,
            n_variants=n_variants,
        )
        return stem, [original_record(frame, stem)] + records, failures

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, stems))
    else:
        results = [process(stem) for stem in stems]

    for stem, records, failures in results:
        if records is None:
            summary["skipped_records"] += 1
            continue
        summary["inputs"] += 1
        summary["failed_variants"] += len(failures)
        for rec in records:
            frame_io.save_frame(output_dir, f"{stem}_v{rec.variant_index}", rec.frame)
            summary["outputs"] += 1
    summary["wall_time_s"] = time.monotonic() - started
    return summary


class GenerativeAugmenter(BaseEstimator):
    """Scikit-learn style front end for the augmentation pipeline.

    Stateless apart from a lazily built noise schedule: ``fit`` validates
    the configuration, ``transform`` maps a sequence of frames to their
    augmented records (original included). ``get_params``/``set_params``
    come from BaseEstimator, so the augmenter drops into pipelines and
    parameter searches.
    """

    def __init__(
        self,
        denoiser=None,
        family="combination",
        n_variants=5,
        train_steps=4000,
        inference_steps=250,
        jump_length=10,
        n_resamples=10,
        seed=0,
    ):
        self.denoiser = denoiser
        self.family = family
        self.n_variants = n_variants
        self.train_steps = train_steps
        self.inference_steps = inference_steps
        self.jump_length = jump_length
        self.n_resamples = n_resamples
        self.seed = seed

    def _config(self):
        return RePaintConfig(
            jump_length=self.jump_length,
            n_resamples=self.n_resamples,
            inference_steps=self.inference_steps,
        )

    def fit(self, X=None, y=None):
        """Validate parameters and build the noise schedule."""
        if self.family not in DATASET_FAMILIES:
            raise ValueError(f"family must be one of {DATASET_FAMILIES}")
        if self.denoiser is None and self.family != "no-repaint":
            raise ValueError("a denoiser is required unless family='no-repaint'")
        self._config().validate(total_steps=self.train_steps)
        self.schedule_ = cosine_schedule(self.train_steps)
        return self

    def transform(self, X, ids=None):
        """Augment a sequence of frames.

        Returns a flat list of AugmentedRecord (1 + n_variants per input
        frame, minus failed variants).
        """
        if not hasattr(self, "schedule_"):
            self.fit()
        if ids is None:
            ids = [f"frame_{i:04d}" for i in range(len(X))]
        out = []
        for source_id, frame in zip(ids, X):
            records, _failures = augment_frame(
                frame,
                self.denoiser,
                self.schedule_,
                self._config(),
                self.seed,
                source_id=source_id,
                family=self.family,
                n_variants=self.n_variants,
            )
            out.append(original_record(frame, source_id))
            out.extend(records)
        return out

    def fit_transform(self, X, y=None, **kwargs):
        return self.fit(X, y).transform(X, **kwargs)
