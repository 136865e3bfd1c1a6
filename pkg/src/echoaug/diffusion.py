"""Denoising-diffusion forward/reverse machinery with learned variance.

A cosine noise schedule defines the forward corruption q(x_t | x_0);
the reverse process consumes a pluggable denoiser that predicts the
injected noise and a per-pixel variance interpolation coefficient. An
analytic Gaussian-oracle denoiser (Bayes-optimal for a known Gaussian
data distribution) verifies the sampling machinery without any trained
network.

All operations work in the model domain [-1, 1] and accept arrays with
arbitrary leading batch dimensions in front of the spatial shape.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

COSINE_OFFSET = 0.008
MAX_BETA = 0.999


class DenoiserOutput(NamedTuple):
    """Predicted noise and variance-interpolation coefficient."""

    eps_hat: np.ndarray
    v: np.ndarray


#: A denoiser maps (x_t, t) -> DenoiserOutput deterministically, where t
#: is the timestep of the schedule the denoiser was built/trained on.
Denoiser = Callable[[np.ndarray, int], DenoiserOutput]


@dataclass
class NoiseSchedule:
    """Per-step noise parameters of a diffusion process.

    ``timestep_map[t]`` is the timestep to hand the denoiser at step t;
    it is the identity for base schedules and maps a respaced schedule
    back onto the schedule its denoiser expects.
    """

    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    timestep_map: np.ndarray = None

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64)
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.alpha_bar = np.asarray(self.alpha_bar, dtype=np.float64)
        if self.timestep_map is None:
            self.timestep_map = np.arange(len(self.beta))
        if not (len(self.beta) == len(self.alpha) == len(self.alpha_bar) == len(self.timestep_map)):
            raise ValueError("schedule arrays must share one length")
        if len(self.beta) < 1:
            raise ValueError("schedule needs at least one step")
        if np.any(self.beta <= 0) or np.any(self.beta >= 1):
            raise ValueError("beta values must lie in (0, 1)")
        if np.any(np.diff(self.alpha_bar) >= 0):
            raise ValueError("alpha_bar must be strictly decreasing")

    @property
    def num_steps(self):
        return len(self.beta)


def cosine_schedule(num_steps):
    """Cosine noise schedule.

    f(t) = cos^2(((t/T + s) / (1 + s)) * pi/2) with offset s = 0.008;
    the cumulative signal fraction is alpha_bar[t] = f(t+1) / f(0).
    Betas are clipped at 0.999 and alpha_bar is recomputed as the running
    product of the clipped alphas, so the cumulative-product identity
    holds exactly.
    """
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    t = np.arange(num_steps + 1, dtype=np.float64) / num_steps
    f = np.cos((t + COSINE_OFFSET) / (1.0 + COSINE_OFFSET) * math.pi / 2.0) ** 2
    beta = np.clip(1.0 - f[1:] / f[:-1], 0.0, MAX_BETA)
    alpha = 1.0 - beta
    return NoiseSchedule(beta=beta, alpha=alpha, alpha_bar=np.cumprod(alpha))


def respace_schedule(schedule, num_inference_steps):
    """Even-stride subsequence of a schedule with recomputed betas.

    Lets inference run fewer steps than the schedule was built with;
    ``timestep_map`` keeps denoiser calls on the original timestep axis.
    """
    t_total = schedule.num_steps
    if not 1 <= num_inference_steps <= t_total:
        raise ValueError(
            f"num_inference_steps={num_inference_steps} outside [1, {t_total}]"
        )
    if num_inference_steps == t_total:
        return schedule
    idx = np.round(np.linspace(0, t_total - 1, num_inference_steps)).astype(int)
    if np.any(np.diff(idx) < 1):
        raise ValueError("respacing produced duplicate timesteps")
    abar = schedule.alpha_bar[idx]
    prev = np.concatenate([[1.0], abar[:-1]])
    alpha = abar / prev
    # recomputed betas at the deep-noise tail may exceed the base
    # schedule's 0.999 clip; they are exact for the subsequence
    return NoiseSchedule(
        beta=1.0 - alpha,
        alpha=alpha,
        alpha_bar=np.cumprod(alpha),
        timestep_map=schedule.timestep_map[idx],
    )


def to_model_domain(image):
    """Map [0, 1] intensities to the model domain [-1, 1]."""
    return np.asarray(image, dtype=np.float64) * 2.0 - 1.0


def to_image_domain(x):
    """Map model-domain values back to clipped [0, 1] intensities."""
    return np.clip((np.asarray(x, dtype=np.float64) + 1.0) / 2.0, 0.0, 1.0)


def q_sample(schedule, x0, t, eps):
    """Forward-noise x0 to step t: sqrt(abar)*x0 + sqrt(1-abar)*eps."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise ValueError(f"x0 shape {x0.shape} != eps shape {eps.shape}")
    abar = schedule.alpha_bar[t]
    return math.sqrt(abar) * x0 + math.sqrt(1.0 - abar) * eps


def posterior_mean_variance(schedule, x0, x_t, t):
    """Gaussian posterior q(x_{t-1} | x_t, x0) for t >= 1."""
    if t < 1:
        raise ValueError("posterior is undefined at t=0 (no previous step)")
    x0 = np.asarray(x0, dtype=np.float64)
    x_t = np.asarray(x_t, dtype=np.float64)
    abar = schedule.alpha_bar[t]
    abar_prev = schedule.alpha_bar[t - 1]
    beta = schedule.beta[t]
    alpha = schedule.alpha[t]
    coef_x0 = math.sqrt(abar_prev) * beta / (1.0 - abar)
    coef_xt = math.sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar)
    mean = coef_x0 * x0 + coef_xt * x_t
    var = (1.0 - abar_prev) / (1.0 - abar) * beta
    return mean, var


def predict_x0(schedule, x_t, eps_hat, t, clamp=True):
    """Invert the forward process to estimate x0 from predicted noise."""
    abar = schedule.alpha_bar[t]
    x0 = (np.asarray(x_t) - math.sqrt(1.0 - abar) * np.asarray(eps_hat)) / math.sqrt(abar)
    return np.clip(x0, -1.0, 1.0) if clamp else x0


def p_mean_variance(schedule, denoiser, x_t, t):
    """Model reverse distribution p(x_{t-1} | x_t).

    The variance interpolates between the upper bound beta_t and the
    posterior variance beta_tilde_t in log space via the denoiser's v
    output (clamped to [0, 1]). At t=0 the previous-step signal fraction
    is taken as 1, which collapses the mean to the x0 estimate.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    eps_hat, v = denoiser(x_t, int(schedule.timestep_map[t]))
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    if eps_hat.shape != x_t.shape:
        raise ValueError("denoiser eps_hat shape mismatch")
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)
    x0_hat = predict_x0(schedule, x_t, eps_hat, t)

    abar = schedule.alpha_bar[t]
    abar_prev = schedule.alpha_bar[t - 1] if t >= 1 else 1.0
    beta = schedule.beta[t]
    alpha = schedule.alpha[t]
    coef_x0 = math.sqrt(abar_prev) * beta / (1.0 - abar)
    coef_xt = math.sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar)
    mean = coef_x0 * x0_hat + coef_xt * x_t
    beta_tilde = (1.0 - abar_prev) / (1.0 - abar) * beta
    # elementwise log-space interpolation; beta_tilde = 0 at t=0 yields
    # zero variance wherever v < 1
    var = beta**v * beta_tilde ** (1.0 - v)
    return mean, var


def reverse_step(schedule, denoiser, x_t, t, rng):
    """One ancestral reverse step; deterministic (no noise) at t=0."""
    mean, var = p_mean_variance(schedule, denoiser, x_t, t)
    if t == 0:
        return mean
    return mean + np.sqrt(var) * rng.standard_normal(x_t.shape)


def sample(schedule, denoiser, shape, rng):
    """Ancestral sampling from pure noise down to the final step."""
    x = rng.standard_normal(shape)
    for t in range(schedule.num_steps - 1, -1, -1):
        x = reverse_step(schedule, denoiser, x, t, rng)
    return x


def gaussian_oracle_denoiser(schedule, mean, var):
    """Bayes-optimal noise predictor for data x0 ~ N(mean, var*I).

    For a Gaussian data distribution the conditional expectation
    E[x0 | x_t] is linear in x_t, which makes the ideal noise prediction
    available in closed form. The variance output v is fixed at 0 (pure
    posterior variance). Useful as a verification oracle: the sampler's
    output statistics can be checked against the known data law.
    """
    if not var > 0:
        raise ValueError(f"var must be > 0, got {var}")
    mean = np.asarray(mean, dtype=np.float64)
    index_of = {int(m): i for i, m in enumerate(schedule.timestep_map)}

    def denoiser(x_t, t):
        x_t = np.asarray(x_t, dtype=np.float64)
        abar = schedule.alpha_bar[index_of[int(t)]]
        gain = math.sqrt(abar) * var / (abar * var + 1.0 - abar)
        e_x0 = mean + gain * (x_t - math.sqrt(abar) * mean)
        eps_hat = (x_t - math.sqrt(abar) * e_x0) / math.sqrt(1.0 - abar)
        return DenoiserOutput(eps_hat=eps_hat, v=np.zeros_like(x_t))

    return denoiser
