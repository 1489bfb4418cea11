import pytest
import numpy as np
from src.analysis.denoisers import (
    GlobalTargetOracle, PerturbedOracle, SpectralPriorDenoiser, ZeroDenoiser, reference_denoisers
)
from src.models.configs import ConditionVector, TileLayout
from src.utils.error_handler import InvalidParameterError, InvalidShapeError


@pytest.fixture
def condition():
    return ConditionVector.from_prompt('a person is playing a violin')


@pytest.fixture
def layout():
    return TileLayout(8, 4, 16)


class TestReferenceDenoisers:
    def test_zero(self, condition, layout, seeded_latent):
        tile = seeded_latent((1, 2, 8, 4, 4))
        v = ZeroDenoiser().predict(tile, 0.5, condition, layout.window(0))
        assert v.shape == tile.shape
        assert not v.any()

    def test_global_target_velocity(self, condition, layout, seeded_latent):
        target = seeded_latent((1, 2, 16, 4, 4), seed=1)
        oracle = GlobalTargetOracle(target)
        window = layout.window(1)
        tile = seeded_latent((1, 2, 8, 4, 4), seed=2)
        v = oracle.predict(tile, 0.25, condition, window)
        expected = (tile.astype(np.float64) - target[:, :, 4:12]) / 0.25
        assert np.allclose(v, expected, atol=1e-5)

    def test_global_target_shape_mismatch(self, condition, layout, seeded_latent):
        oracle = GlobalTargetOracle(seeded_latent((1, 2, 16, 4, 4)))
        with pytest.raises(InvalidShapeError):
            oracle.predict(seeded_latent((1, 1, 8, 4, 4)), 0.5, condition, layout.window(0))

    def test_spectral_prior_at_full_noise_returns_input(self, condition, layout, seeded_latent):
        tile = seeded_latent((1, 2, 8, 4, 4))
        v = SpectralPriorDenoiser().predict(tile, 1.0, condition, layout.window(0))
        assert np.allclose(v, tile, atol=1e-5)

    def test_spectral_prior_keeps_constant_content(self, condition, layout):
        # A constant tile is pure DC, where the prior variance is 1
        tile = np.full((1, 1, 8, 4, 4), 0.7, dtype=np.float32)
        sigma = 0.5
        v = SpectralPriorDenoiser().predict(tile, sigma, condition, layout.window(0))
        gain = (1 - sigma) / ((1 - sigma) ** 2 + sigma ** 2)
        assert np.allclose(v, 0.7 * (1 - gain) / sigma, atol=1e-5)

    def test_perturbed_oracle(self, condition, layout, seeded_latent):
        target = seeded_latent((1, 2, 16, 4, 4), seed=1)
        tile = seeded_latent((1, 2, 8, 4, 4), seed=2)
        base = GlobalTargetOracle(target).predict(tile, 0.5, condition, layout.window(0))

        unperturbed = PerturbedOracle(target, 0.0).predict(tile, 0.5, condition, layout.window(0))
        assert np.array_equal(unperturbed, base)

        oracle = PerturbedOracle(target, 0.5, seed=3)
        first = oracle.predict(tile, 0.5, condition, layout.window(0))
        again = oracle.predict(tile, 0.5, condition, layout.window(0))
        other_tile = oracle.predict(tile, 0.5, condition, layout.window(1))
        assert np.array_equal(first, again)
        assert not np.array_equal(first, other_tile)
        assert 0.4 < np.std(first - base) < 0.6

    def test_perturbed_oracle_arguments(self, seeded_latent):
        with pytest.raises(InvalidParameterError):
            PerturbedOracle(seeded_latent((1, 1, 8, 2, 2)), -0.1)
        with pytest.raises(InvalidParameterError):
            PerturbedOracle(None, 0.5)
        wrapped = PerturbedOracle(None, 0.5, base=SpectralPriorDenoiser())
        assert isinstance(wrapped.base, SpectralPriorDenoiser)

    def test_reference_denoisers(self, seeded_latent):
        assert set(reference_denoisers()) == {'zero', 'spectral-prior'}
        assert set(reference_denoisers(seeded_latent((1, 1, 8, 2, 2)))) == {
            'zero', 'spectral-prior', 'global-target', 'perturbed-oracle'
        }
