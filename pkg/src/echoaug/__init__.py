"""Generative augmentations for sector-shaped cardiac ultrasound.

Geometric transforms reposition an annotated sector, a diffusion model
repaints the vacated regions, and evaluation utilities (segmentation
metrics, biplane ejection fraction, agreement statistics, a blinded
realism survey) measure the effect.
"""

from .augment import (
    AugmentedRecord,
    GenerativeAugmenter,
    augment_dataset,
    augment_frame,
    compute_repaint_mask,
    original_record,
)
from .diffusion import (
    Denoiser,
    DenoiserOutput,
    NoiseSchedule,
    cosine_schedule,
    gaussian_oracle_denoiser,
    p_mean_variance,
    posterior_mean_variance,
    q_sample,
    respace_schedule,
    reverse_step,
    sample,
)
from .ef import (
    BlandAltmanStats,
    DiscStack,
    EFResult,
    ExamRecord,
    biplane_volume,
    bland_altman,
    ef_fraction,
    exam_ef,
    extract_discs,
    is_out_of_range,
)
from .geometry import Frame, SectorGeometry, points_in_sector, sector_mask
from .metrics import (
    FrameMetrics,
    dice,
    hausdorff_mm,
    lv_heatmap,
    most_similar,
    ssim,
    subset_report,
)
from .repaint import RePaintConfig, inpaint, repaint_time_sequence
from .survey import (
    ResponseStore,
    SurveyPlan,
    SurveyResponse,
    binomial_test,
    build_plan,
    summarize,
)
from .transforms import (
    AugmentationSpec,
    apply_transform,
    narrow_sector_preproc,
    sample_spec,
    subsample_indices,
)
from .validation import BACKGROUND, LA, LV, MYO

__version__ = "0.1.0"

__all__ = [
    "AugmentationSpec",
    "AugmentedRecord",
    "BACKGROUND",
    "BlandAltmanStats",
    "Denoiser",
    "DenoiserOutput",
    "DiscStack",
    "EFResult",
    "ExamRecord",
    "Frame",
    "FrameMetrics",
    "GenerativeAugmenter",
    "LA",
    "LV",
    "MYO",
    "NoiseSchedule",
    "RePaintConfig",
    "ResponseStore",
    "SectorGeometry",
    "SurveyPlan",
    "SurveyResponse",
    "apply_transform",
    "augment_dataset",
    "augment_frame",
    "binomial_test",
    "biplane_volume",
    "bland_altman",
    "build_plan",
    "compute_repaint_mask",
    "cosine_schedule",
    "dice",
    "ef_fraction",
    "exam_ef",
    "extract_discs",
    "gaussian_oracle_denoiser",
    "hausdorff_mm",
    "inpaint",
    "is_out_of_range",
    "lv_heatmap",
    "most_similar",
    "narrow_sector_preproc",
    "original_record",
    "p_mean_variance",
    "points_in_sector",
    "posterior_mean_variance",
    "q_sample",
    "repaint_time_sequence",
    "respace_schedule",
    "reverse_step",
    "sample",
    "sample_spec",
    "sector_mask",
    "ssim",
    "subsample_indices",
    "subset_report",
    "summarize",
]
