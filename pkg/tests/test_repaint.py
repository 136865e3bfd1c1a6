"""Masked inpainting tests."""

import numpy as np
import pytest

from echoaug.diffusion import cosine_schedule, gaussian_oracle_denoiser
from echoaug.repaint import RePaintConfig, inpaint, repaint_time_sequence


def reference_time_sequence(num_steps, jump_length, n_resamples):
    """Independent enumeration oracle for the jump schedule.

    Straight transliteration of the resampling walk: jump points sit on
    the jump_length grid wherever a full upward jump stays on the
    timestep axis, and each fires n_resamples - 1 times.
    """
    remaining = {}
    s = 0
    while s + jump_length <= num_steps - 1:
        remaining[s] = n_resamples - 1
        s += jump_length
    sequence = []
    t = num_steps - 1
    sequence.append(t)
    while t != 0:
        t = t - 1
        sequence.append(t)
        if remaining.get(t, 0) > 0:
            remaining[t] = remaining[t] - 1
            t = t + jump_length
            sequence.append(t)
    return sequence


class TestTimeSequence:
    def test_no_resampling_is_plain_descent(self):
        assert repaint_time_sequence(10, 5, 1) == list(range(9, -1, -1))

    @pytest.mark.parametrize(
        "num_steps,jump,resamples",
        [(10, 5, 2), (250, 10, 10), (25, 10, 3), (40, 8, 2), (7, 7, 4)],
    )
    def test_matches_reference_enumeration(self, num_steps, jump, resamples):
        seq = repaint_time_sequence(num_steps, jump, resamples)
        assert seq == reference_time_sequence(num_steps, jump, resamples)

    @pytest.mark.parametrize(
        "num_steps,jump,resamples", [(10, 5, 2), (250, 10, 10), (31, 4, 3)]
    )
    def test_structure(self, num_steps, jump, resamples):
        seq = repaint_time_sequence(num_steps, jump, resamples)
        assert seq[0] == num_steps - 1
        assert seq[-1] == 0
        assert min(seq) >= 0 and max(seq) <= num_steps - 1
        diffs = np.diff(seq)
        assert set(diffs.tolist()) <= {-1, jump}
        # length bound: base walk plus the expanded resampling excursions
        n_jump_points = len(range(0, num_steps - jump, jump))
        assert len(seq) <= num_steps + (resamples - 1) * n_jump_points * 2 * jump

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            repaint_time_sequence(10, 0, 1)
        with pytest.raises(ValueError):
            repaint_time_sequence(10, 11, 1)
        with pytest.raises(ValueError):
            repaint_time_sequence(10, 5, 0)


def blob_keep_mask(shape, rng):
    """Random keep mask with at least one kept and one synthesized pixel."""
    kind = rng.integers(3)
    mask = np.ones(shape, dtype=np.uint8)
    h, w = shape
    if kind == 0:  # rectangle hole
        r0, c0 = rng.integers(0, h - 4), rng.integers(0, w - 4)
        r1, c1 = rng.integers(r0 + 2, h), rng.integers(c0 + 2, w)
        mask[r0:r1, c0:c1] = 0
    elif kind == 1:  # random scatter
        mask = (rng.random(shape) < 0.7).astype(np.uint8)
    else:  # half image
        mask[:, : w // 2] = 0
    if mask.all():
        mask[h // 2, w // 2] = 0
    if not mask.any():
        mask[0, 0] = 1
    return mask


class TestInpaint:
    def setup_method(self):
        self.schedule = cosine_schedule(40)
        self.denoiser = gaussian_oracle_denoiser(self.schedule, mean=0.0, var=0.04)
        self.config = RePaintConfig(jump_length=8, n_resamples=2, inference_steps=None)

    def test_known_region_preserved_exactly(self):
        rng = np.random.default_rng(0)
        image = rng.random((16, 16))
        keep = blob_keep_mask((16, 16), rng)
        out = inpaint(self.schedule, self.denoiser, image, keep, self.config, rng)
        kept = keep.astype(bool)
        assert np.abs(out[kept] - image[kept]).max() <= 1e-6

    def test_single_pixel_synthesis(self):
        rng = np.random.default_rng(1)
        image = rng.random((12, 12))
        keep = np.ones((12, 12), dtype=np.uint8)
        keep[5, 7] = 0
        out = inpaint(self.schedule, self.denoiser, image, keep, self.config, rng)
        diff = np.abs(out - image)
        assert diff[keep.astype(bool)].max() <= 1e-6

    def test_deterministic_under_seed(self):
        image = np.random.default_rng(2).random((10, 10))
        keep = np.ones((10, 10), dtype=np.uint8)
        keep[:4, :4] = 0
        a = inpaint(self.schedule, self.denoiser, image, keep, self.config, np.random.default_rng(5))
        b = inpaint(self.schedule, self.denoiser, image, keep, self.config, np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_synthesized_half_matches_oracle_prior(self):
        # 2000 independent runs batched into one elementwise chain
        n_runs = 2000
        mean_model = 0.3  # model domain
        schedule = cosine_schedule(50)
        denoiser = gaussian_oracle_denoiser(schedule, mean=mean_model, var=0.01)
        base = np.full((8, 8), 0.65)
        image = np.tile(base, (n_runs, 1, 1))
        keep = np.ones((8, 8), dtype=np.uint8)
        keep[:, : 4] = 0
        keep_b = np.tile(keep, (n_runs, 1, 1))
        out = inpaint(
            schedule,
            denoiser,
            image,
            keep_b,
            RePaintConfig(jump_length=10, n_resamples=2),
            np.random.default_rng(21),
        )
        synth = out[:, :, :4]
        # image domain: model-domain prior mean 0.3 -> (0.3 + 1) / 2
        assert abs(synth.mean() - (mean_model + 1) / 2) < 0.05 / 2
        kept_side = out[:, :, 4:]
        assert np.abs(kept_side - 0.65).max() <= 1e-6

    def test_mask_shape_mismatch(self):
        image = np.zeros((8, 8))
        with pytest.raises(ValueError):
            inpaint(self.schedule, self.denoiser, image, np.zeros((4, 4)), self.config,
                    np.random.default_rng(0))

    def test_all_ones_mask_rejected(self):
        image = np.zeros((8, 8))
        with pytest.raises(ValueError):
            inpaint(self.schedule, self.denoiser, image, np.ones((8, 8)), self.config,
                    np.random.default_rng(0))

    def test_respaced_inference(self):
        schedule = cosine_schedule(200)
        denoiser = gaussian_oracle_denoiser(schedule, mean=0.0, var=0.04)
        config = RePaintConfig(jump_length=5, n_resamples=2, inference_steps=25)
        rng = np.random.default_rng(3)
        image = rng.random((8, 8))
        keep = np.ones((8, 8), dtype=np.uint8)
        keep[2:5, 2:5] = 0
        out = inpaint(schedule, denoiser, image, keep, config, rng)
        kept = keep.astype(bool)
        assert np.abs(out[kept] - image[kept]).max() <= 1e-6
        assert np.all(np.isfinite(out))

    def test_one_step_walk_preserves_known(self):
        schedule = cosine_schedule(40)
        config = RePaintConfig(jump_length=1, n_resamples=1, inference_steps=1)
        rng = np.random.default_rng(4)
        image = rng.random((6, 6))
        keep = np.ones((6, 6), dtype=np.uint8)
        keep[0, 0] = 0
        out = inpaint(schedule, self.denoiser, image, keep, config, rng)
        kept = keep.astype(bool)
        assert np.abs(out[kept] - image[kept]).max() <= 1e-6

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            RePaintConfig(jump_length=0).validate()
        with pytest.raises(ValueError):
            RePaintConfig(n_resamples=0).validate()
        with pytest.raises(ValueError):
            RePaintConfig(jump_length=10, inference_steps=5).validate()
        with pytest.raises(ValueError):
            RePaintConfig(inference_steps=100).validate(total_steps=50)
