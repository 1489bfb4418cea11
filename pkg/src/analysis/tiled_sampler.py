from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional
import logging
import numpy as np
from tqdm import tqdm

from .denoisers import Denoiser
from .latent_fusion import FusionAccumulator
from .noise_initializer import NoiseInitializer
from ..core.tensor_ops import LatentTensor, as_latent
from ..models.configs import ConditionVector, GenerationConfig, SigmaSchedule, TileLayout, TileWindow
from ..utils.error_handler import DenoiserError, InvalidParameterError, InvalidShapeError


def build_schedule(steps: int) -> SigmaSchedule:
    """Linear flow-matching schedule sigma_i = 1 - i/steps, i = 0..steps"""
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise InvalidParameterError(f"Step count must be a positive integer, got {steps}")
    steps = int(steps)
    values = [1.0 - i / steps for i in range(steps)] + [0.0]
    return SigmaSchedule(tuple(values))


def euler_step(x: LatentTensor, v: LatentTensor, sigma_cur: float, sigma_next: float) -> LatentTensor:
    """x + (sigma_next - sigma_cur) * v"""
    if x.shape != v.shape:
        raise InvalidShapeError(f"Latent shape {x.shape} and velocity shape {v.shape} differ")
    if not sigma_next < sigma_cur:
        raise InvalidParameterError(f"sigma_next ({sigma_next}) must be below sigma_cur ({sigma_cur})")
    stepped = x.astype(np.float64) + (sigma_next - sigma_cur) * v.astype(np.float64)
    return stepped.astype(np.float32)


class TiledSampler:
    """
    Tiled denoising loop

    Each step cuts the long latent into the layout's sliding tiles, asks the
    denoiser for every tile at the current noise level, fuses the predictions
    and applies one Euler update to the whole latent. Tiles of a step may be
    evaluated concurrently, at most max_in_flight at a time; fusion folds
    them in tile order so the result does not depend on completion order.
    """

    def __init__(self,
                 denoiser: Denoiser,
                 layout: TileLayout,
                 condition: ConditionVector,
                 parallel_tiles: bool = False,
                 max_in_flight: int = 4,
                 show_progress: bool = False):
        self.logger = logging.getLogger('TiledSampler')
        self.denoiser = denoiser
        self.layout = layout
        self.condition = condition
        self.parallel_tiles = parallel_tiles and getattr(denoiser, 'thread_safe', False)
        self.max_in_flight = max(1, int(max_in_flight))
        self.show_progress = show_progress
        if parallel_tiles and not self.parallel_tiles:
            self.logger.info("Denoiser is not thread safe; evaluating tiles sequentially")

    def _predict_tile(self, x_long: np.ndarray, window: TileWindow, sigma: float) -> np.ndarray:
        tile = x_long[:, :, window.start:window.stop]
        try:
            prediction = self.denoiser.predict(tile, sigma, self.condition, window)
            prediction = np.asarray(prediction)
            if prediction.shape != tile.shape:
                raise InvalidShapeError(f"prediction shape {prediction.shape} differs from tile shape {tile.shape}")
            if not np.all(np.isfinite(prediction)):
                raise InvalidShapeError("prediction contains NaN or Inf values")
            return prediction.astype(np.float32, copy=False)
        except Exception as e:
            raise DenoiserError(str(e), window.index, sigma) from e

    def _batches(self, windows: List[TileWindow]) -> List[List[TileWindow]]:
        size = self.max_in_flight if self.parallel_tiles else 1
        return [windows[i:i + size] for i in range(0, len(windows), size)]

    def denoise_step_tiled(self, x_long: LatentTensor, sigma_cur: float, sigma_next: float) -> LatentTensor:
        """One fused Euler step over the long latent"""
        x_long = as_latent(x_long)
        if x_long.shape[2] != self.layout.long_length:
            raise InvalidShapeError(
                f"Latent has {x_long.shape[2]} frames, layout expects {self.layout.long_length}"
            )

        accumulator = FusionAccumulator(self.layout)
        windows = self.layout.windows()
        if self.parallel_tiles:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as executor:
                for batch in self._batches(windows):
                    futures = {
                        window.index: executor.submit(self._predict_tile, x_long, window, sigma_cur)
                        for window in batch
                    }
                    for index, future in futures.items():
                        accumulator.add(index, future.result())
        else:
            for window in windows:
                accumulator.add(window.index, self._predict_tile(x_long, window, sigma_cur))

        fused = accumulator.result()
        return euler_step(x_long, fused, sigma_cur, sigma_next)

    def sample(self, x_init: LatentTensor, schedule: SigmaSchedule) -> LatentTensor:
        """Run the whole schedule from an explicit initial latent"""
        x = as_latent(x_init).copy()
        pairs = schedule.pairs()
        for sigma_cur, sigma_next in tqdm(pairs, desc='denoising', disable=not self.show_progress):
            x = self.denoise_step_tiled(x, sigma_cur, sigma_next)
            self.logger.debug(f"Step sigma {sigma_cur:.4f} -> {sigma_next:.4f} done")
        return x


def initial_latent(cfg: GenerationConfig) -> LatentTensor:
    """Long noise initialization, or i.i.d. long noise when it is disabled"""
    initializer = NoiseInitializer(cfg.noise)
    if cfg.long_noise_init:
        return initializer.init_long_noise()
    return initializer.fresh_long_noise()


def generate(cfg: GenerationConfig,
             denoiser: Denoiser,
             show_progress: bool = False,
             x_init: Optional[LatentTensor] = None
             ) -> LatentTensor:
    """Initialize the long noise and denoise it tile by tile over the schedule"""
    logger = logging.getLogger('TiledSampler')
    try:
        x = initial_latent(cfg) if x_init is None else as_latent(x_init)
        sampler = TiledSampler(denoiser, cfg.layout, cfg.condition,
                               parallel_tiles=cfg.parallel_tiles,
                               max_in_flight=cfg.max_in_flight,
                               show_progress=show_progress)
        logger.info(
            f"Generating {x.shape} with {cfg.layout.tile_count} tiles "
            f"(n={cfg.layout.tile_length}, o={cfg.layout.overlap}) over {cfg.schedule.steps} steps"
        )
        return sampler.sample(x, cfg.schedule)
    except Exception as e:
        logger.error(f"Error during generation: {str(e)}")
        raise
