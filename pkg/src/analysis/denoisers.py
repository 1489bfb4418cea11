from abc import ABC, abstractmethod
from typing import Dict, Optional
import numpy as np

from ..core.rng import SeededRng
from ..core.tensor_ops import LatentTensor, as_latent, fft3, ifft3
from ..core.frequency_filter import butterworth_mask
from ..models.configs import ConditionVector, TileWindow
from ..utils.error_handler import InvalidParameterError, InvalidShapeError

SIGMA_FLOOR = 1e-6

DENOISER_NAMES = ('zero', 'global-target', 'perturbed-oracle', 'spectral-prior')
ORACLE_NAMES = ('global-target', 'perturbed-oracle')


class Denoiser(ABC):
    """
    Model seam of the tiled sampler

    predict() maps a tile of the long latent at noise level sigma to a
    flow-matching velocity of the same shape. It must be deterministic in its
    arguments. Implementations that cannot be called from several threads at
    once set thread_safe = False and are evaluated sequentially.
    """

    thread_safe = True

    @abstractmethod
    def predict(self,
                tile: LatentTensor,
                sigma: float,
                condition: ConditionVector,
                window: TileWindow
                ) -> LatentTensor:
        ...


class ZeroDenoiser(Denoiser):
    """Always predicts zero velocity"""

    def predict(self, tile, sigma, condition, window):
        return np.zeros_like(tile, dtype=np.float32)


class GlobalTargetOracle(Denoiser):
    """Velocity (x - target) / max(sigma, floor) toward a fixed long target latent"""

    def __init__(self, target: LatentTensor, sigma_floor: float = SIGMA_FLOOR):
        self.target = as_latent(target)
        self.sigma_floor = sigma_floor

    def target_slice(self, window: TileWindow) -> np.ndarray:
        return self.target[:, :, window.start:window.stop]

    def predict(self, tile, sigma, condition, window):
        target = self.target_slice(window)
        if target.shape != tile.shape:
            raise InvalidShapeError(f"Tile shape {tile.shape} does not match target slice {target.shape}")
        velocity = (tile.astype(np.float64) - target) / max(sigma, self.sigma_floor)
        return velocity.astype(np.float32)


class SpectralPriorDenoiser(Denoiser):
    """
    Exact posterior-mean velocity for Gaussian data with a low-pass spectrum

    Clean tiles are modelled as Gaussian with per-bin variance equal to the
    Butterworth gain s of the tile's 3D spectrum. For x = (1 - sigma) x0 + sigma eps
    the posterior mean is x0_hat = (1 - sigma) s / ((1 - sigma)^2 s + sigma^2) * x
    per bin, and v = (x - x0_hat) / sigma. Sampling from sigma = 1 to 0 turns
    the initial noise into a low-passed copy of itself.
    """

    def __init__(self,
                 order: int = 4,
                 temporal_cutoff: float = 0.25,
                 spatial_cutoff: float = 0.25,
                 sigma_floor: float = SIGMA_FLOOR):
        self.order = order
        self.temporal_cutoff = temporal_cutoff
        self.spatial_cutoff = spatial_cutoff
        self.sigma_floor = sigma_floor

    def predict(self, tile, sigma, condition, window):
        _, _, frames, height, width = tile.shape
        spectrum_variance = butterworth_mask(frames, height, width, self.order,
                                             self.temporal_cutoff, self.spatial_cutoff).values
        signal = 1.0 - sigma
        gain = signal * spectrum_variance / (signal ** 2 * spectrum_variance + sigma ** 2)
        clean_estimate = ifft3(fft3(tile) * gain[None, None])
        velocity = (tile.astype(np.float64) - clean_estimate) / max(sigma, self.sigma_floor)
        return velocity.astype(np.float32)


class PerturbedOracle(Denoiser):
    """
    A base denoiser plus a fixed per-tile perturbation field

    The field for tile i is i.i.d. standard normal, drawn from stream
    'perturb-{i}' of `seed` and scaled by `amplitude`. Overlapping tiles
    therefore disagree, which is what fusion has to smooth out.
    """

    def __init__(self,
                 target: Optional[LatentTensor],
                 amplitude: float,
                 seed: int = 0,
                 base: Optional[Denoiser] = None):
        if amplitude < 0:
            raise InvalidParameterError(f"Perturbation amplitude must be non-negative, got {amplitude}")
        if base is None:
            if target is None:
                raise InvalidParameterError("PerturbedOracle needs a target or a base denoiser")
            base = GlobalTargetOracle(target)
        self.base = base
        self.amplitude = float(amplitude)
        self.seed = seed
        self.thread_safe = base.thread_safe

    def perturbation(self, window: TileWindow, shape) -> np.ndarray:
        return SeededRng(self.seed, f"perturb-{window.index}").standard_normal(shape)

    def predict(self, tile, sigma, condition, window):
        velocity = self.base.predict(tile, sigma, condition, window)
        if self.amplitude == 0.0:
            return velocity
        field = self.perturbation(window, tile.shape)
        return (velocity.astype(np.float64) + self.amplitude * field).astype(np.float32)


def reference_denoisers(target: Optional[LatentTensor] = None,
                        amplitude: float = 0.5,
                        seed: int = 0,
                        order: int = 4,
                        temporal_cutoff: float = 0.25,
                        spatial_cutoff: float = 0.25
                        ) -> Dict[str, Denoiser]:
    """The verification doubles by CLI name; oracles only when a target is given"""
    denoisers: Dict[str, Denoiser] = {
        'zero': ZeroDenoiser(),
        'spectral-prior': SpectralPriorDenoiser(order, temporal_cutoff, spatial_cutoff),
    }
    if target is not None:
        denoisers['global-target'] = GlobalTargetOracle(target)
        denoisers['perturbed-oracle'] = PerturbedOracle(target, amplitude, seed=seed)
    return denoisers
