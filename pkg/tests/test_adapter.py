"""TorchScript denoiser adapter tests (skipped when torch is absent)."""

import numpy as np
import pytest

torch = pytest.importorskip("torch")

from echoaug.adapter import TorchScriptDenoiser
from echoaug.diffusion import cosine_schedule
from echoaug.repaint import RePaintConfig, inpaint


class ScaledNoiseModel(torch.nn.Module):
    """Tiny contract-conforming network: eps = 0.1 * x, v = 0.5."""

    def forward(self, x, t: int):
        eps = 0.1 * x
        v = torch.full_like(x, 0.5)
        return torch.cat([eps, v], dim=1)


@pytest.fixture
def scripted_model(tmp_path):
    path = tmp_path / "denoiser.pt"
    module = torch.jit.script(ScaledNoiseModel())
    module.save(str(path))
    return path


class TestTorchScriptDenoiser:
    def test_contract_output(self, scripted_model):
        denoiser = TorchScriptDenoiser(scripted_model)
        x = np.random.default_rng(0).standard_normal((16, 16))
        eps, v = denoiser(x, 3)
        assert eps.shape == (16, 16)
        assert np.allclose(eps, 0.1 * x, atol=1e-6)
        assert np.allclose(v, 0.5)

    def test_batched_input(self, scripted_model):
        denoiser = TorchScriptDenoiser(scripted_model)
        x = np.random.default_rng(1).standard_normal((3, 8, 8))
        eps, v = denoiser(x, 0)
        assert eps.shape == (3, 8, 8)
        assert np.allclose(eps, 0.1 * x, atol=1e-6)

    def test_drives_inpainting(self, scripted_model):
        denoiser = TorchScriptDenoiser(scripted_model)
        schedule = cosine_schedule(32)
        rng = np.random.default_rng(2)
        image = rng.random((16, 16))
        keep = np.ones((16, 16), dtype=np.uint8)
        keep[4:9, 4:9] = 0
        out = inpaint(schedule, denoiser, image, keep,
                      RePaintConfig(jump_length=8, n_resamples=2), rng)
        kept = keep.astype(bool)
        assert np.abs(out[kept] - image[kept]).max() <= 1e-6
        assert np.all(np.isfinite(out))

    def test_contract_violation_detected(self, tmp_path):
        class WrongShape(torch.nn.Module):
            def forward(self, x, t: int):
                return x  # single channel: violates the two-channel contract

        path = tmp_path / "bad.pt"
        torch.jit.script(WrongShape()).save(str(path))
        denoiser = TorchScriptDenoiser(path)
        with pytest.raises(ValueError):
            denoiser(np.zeros((8, 8)), 0)
