"""Masked inpainting with time-travel resampling.

Synthesizes only the masked-out pixels of an image: after every reverse
diffusion step the known region is replaced by the input forward-noised
to the current step, so the unconditional model is guided by the image
content it must blend with. Periodic jumps back up the noise axis
(resampling) re-harmonize the synthesized and known regions.

The terminal merge at step 0 uses the raw input with no noise added,
which makes preservation of the known region exact.
"""

from dataclasses import dataclass

import numpy as np

from .diffusion import (
    q_sample,
    respace_schedule,
    reverse_step,
    to_image_domain,
    to_model_domain,
)
from .validation import check_keep_mask


@dataclass
class RePaintConfig:
    """Inpainting loop parameters.

    ``jump_length`` reverse steps are followed by a jump back up of the
    same length, repeated ``n_resamples - 1`` extra times at each jump
    point. ``inference_steps`` respaces the schedule; None runs the full
    schedule.
    """

    jump_length: int = 10
    n_resamples: int = 10
    inference_steps: int = None

    def validate(self, total_steps=None):
        if self.jump_length < 1:
            raise ValueError(f"jump_length must be >= 1, got {self.jump_length}")
        if self.n_resamples < 1:
            raise ValueError(f"n_resamples must be >= 1, got {self.n_resamples}")
        if self.inference_steps is not None:
            if self.inference_steps < max(self.jump_length, 1):
                raise ValueError(
                    f"inference_steps={self.inference_steps} smaller than "
                    f"jump_length={self.jump_length}"
                )
            if total_steps is not None and self.inference_steps > total_steps:
                raise ValueError(
                    f"inference_steps={self.inference_steps} exceeds schedule "
                    f"length {total_steps}"
                )
        return self


def repaint_time_sequence(num_steps, jump_length, n_resamples):
    """Sequence of timesteps visited by the inpainting walk.

    Descends from num_steps - 1 to 0 one step at a time; at every jump
    point (multiples of ``jump_length`` that leave room to jump) the
    walk goes back up by ``jump_length`` -- encoded as a single
    ascending pair -- n_resamples - 1 times before moving on. With
    n_resamples = 1 this is the plain descending sequence.
    """
    if not 1 <= jump_length <= num_steps:
        raise ValueError(
            f"jump_length must be in [1, {num_steps}], got {jump_length}"
        )
    if n_resamples < 1:
        raise ValueError(f"n_resamples must be >= 1, got {n_resamples}")
    fires = {
        t: n_resamples - 1
        for t in range(0, num_steps - jump_length, jump_length)
    }
    t = num_steps - 1
    seq = [t]
    while t > 0:
        t -= 1
        seq.append(t)
        if fires.get(t, 0) > 0:
            fires[t] -= 1
            t += jump_length
            seq.append(t)
    return seq


def inpaint(schedule, denoiser, image, keep_mask, config, rng):
    """Synthesize the keep_mask==0 region of an image.

    ``image`` is a [0, 1] intensity array; the result is returned in the
    same domain. Pixels with keep_mask == 1 are preserved exactly (up to
    the [0,1] <-> [-1,1] domain round-trip).
    """
    image = np.asarray(image, dtype=np.float64)
    keep = check_keep_mask(keep_mask, image.shape).astype(np.float64)
    config.validate(total_steps=schedule.num_steps)

    steps = config.inference_steps or schedule.num_steps
    sub = respace_schedule(schedule, steps)
    seq = repaint_time_sequence(sub.num_steps, config.jump_length, config.n_resamples)

    known = to_model_domain(image)
    x = rng.standard_normal(image.shape)
    for t_cur, t_next in zip(seq, seq[1:]):
        if t_next == t_cur - 1:
            x_unknown = reverse_step(sub, denoiser, x, t_cur, rng)
            if t_next == 0:
                x_known = known
            else:
                x_known = q_sample(sub, known, t_next, rng.standard_normal(image.shape))
            x = keep * x_known + (1.0 - keep) * x_unknown
        else:
            # jump back up via single-step forward noising transitions
            for u in range(t_cur + 1, t_next + 1):
                x = np.sqrt(sub.alpha[u]) * x + np.sqrt(sub.beta[u]) * rng.standard_normal(
                    image.shape
                )
    # terminal merge (idempotent after the final descending transition;
    # load-bearing only for one-step walks)
    x = keep * known + (1.0 - keep) * x
    return to_image_domain(x)
