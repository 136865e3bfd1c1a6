"""Denoiser adapter for serialized trained networks.

Loads a TorchScript module implementing the interchange contract
(float tensor [1, 1, H, W], int timestep) -> float tensor [1, 2, H, W]
with channel 0 the predicted noise and channel 1 the variance
interpolation coefficient. Torch is an optional dependency; importing
this module without it only fails when an adapter is built.
"""

import threading

import numpy as np

from .diffusion import DenoiserOutput


class TorchScriptDenoiser:
    """Wrap a TorchScript network as a Denoiser.

    Calls are serialized with a lock so one adapter instance can be
    shared across worker threads.
    """

    def __init__(self, path, device="cpu"):
        try:
            import torch
        except ImportError as exc:  # pragma: no cover - environment dependent
            raise ImportError(
                "the TorchScript denoiser adapter requires torch; "
                "install the 'torch' extra"
            ) from exc
        self._torch = torch
        self.device = device
        self.module = torch.jit.load(str(path), map_location=device)
        self.module.eval()
        self._lock = threading.Lock()

    def __call__(self, x_t, t):
        torch = self._torch
        x_t = np.asarray(x_t, dtype=np.float64)
        batch_shape = x_t.shape[:-2]
        flat = x_t.reshape((-1,) + x_t.shape[-2:])
        eps = np.empty_like(flat)
        v = np.empty_like(flat)
        with self._lock, torch.no_grad():
            for i, plane in enumerate(flat):
                tin = torch.from_numpy(plane[None, None].astype(np.float32)).to(self.device)
                out = self.module(tin, int(t))
                out = out.detach().cpu().numpy().astype(np.float64)
                if out.shape != (1, 2) + plane.shape:
                    raise ValueError(
                        f"adapter contract violated: expected output shape "
                        f"{(1, 2) + plane.shape}, got {out.shape}"
                    )
                eps[i] = out[0, 0]
                v[i] = out[0, 1]
        return DenoiserOutput(
            eps_hat=eps.reshape(batch_shape + x_t.shape[-2:]),
            v=np.clip(v.reshape(batch_shape + x_t.shape[-2:]), 0.0, 1.0),
        )
