from typing import Optional
import logging
import numpy as np

from ..core.rng import SeededRng
from ..core.tensor_ops import LatentTensor, as_latent, ifft3, randn
from ..core.frequency_filter import butterworth_mask, split_frequency
from ..models.configs import NoiseInitConfig, BlendMode
from ..utils.error_handler import InvalidParameterError

INIT_STREAM = 'init'
SHUFFLE_STREAM = 'shuffle'
FRESH_STREAM = 'fresh'
IID_STREAM = 'init-iid'


def normalized_blend(original: np.ndarray, fresh: np.ndarray, w) -> np.ndarray:
    """Variance-preserving mix ((1 - w) * original + w * fresh) / sqrt(w^2 + (1 - w)^2)"""
    w = np.asarray(w, dtype=np.float64)
    return ((1.0 - w) * original + w * fresh) / np.sqrt(w ** 2 + (1.0 - w) ** 2)


class NoiseInitializer:
    """
    Long noise initialization

    Builds a long initial noise from a short one: replicate it, shuffle the
    stride portion of every consecutive tile pair, then blend in the
    high-frequency content of a fresh noise with a weight that ramps from 0
    to the max merging factor over the video.
    """

    def __init__(self, config: Optional[NoiseInitConfig] = None):
        self.logger = logging.getLogger('NoiseInitializer')
        self.config = config or NoiseInitConfig()

    def replicate_noise(self, short: LatentTensor, n: int) -> LatentTensor:
        """Concatenate n copies of the short noise along the frame axis"""
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise InvalidParameterError(f"Replication count must be a positive integer, got {n}")
        short = as_latent(short)
        return np.tile(short, (1, 1, int(n), 1, 1))

    def shuffle_strides(self, long: LatentTensor, t: int, o: int, rng: SeededRng) -> LatentTensor:
        """
        Overwrite each stride portion with a shuffled copy of the frames one tile earlier

        For idx = t, t + (t - o), ... while idx + (t - o) <= L, frames
        [idx, idx + t - o) receive a permutation of frames [idx - t, idx - o)
        as they stand at that iteration (later strides see earlier writes).

        Args:
            long: Replicated long noise with L frames
            t: Tile frames
            o: Overlap, 0 <= o < t
            rng: Stream the permutations are drawn from

        Returns:
            New tensor; the input is left untouched
        """
        if not 0 <= o < t:
            raise InvalidParameterError(f"Overlap must satisfy 0 <= o < t, got o={o}, t={t}")
        shuffled = as_latent(long).copy()
        length = shuffled.shape[2]
        stride = t - o

        idx = t
        while idx + stride <= length:
            tile_indices = rng.permutation(np.arange(idx - t, idx - o))
            shuffled[:, :, idx:idx + stride] = shuffled[:, :, tile_indices]
            idx += stride

        self.logger.debug(f"Shuffled {(idx - t) // stride} strides of length {stride} over {length} frames")
        return shuffled

    def blend_high_frequency(self,
                             long: LatentTensor,
                             cfg: Optional[NoiseInitConfig] = None,
                             rng: Optional[SeededRng] = None
                             ) -> LatentTensor:
        """
        Replace part of the high-frequency content with that of a fresh noise

        Time-ramp mode mixes the inverse-transformed high parts frame by frame
        with w_f = linspace(0, w_max, L); literal mode applies the same ramp
        along the temporal frequency axis of the complex high parts before a
        single inverse transform.
        """
        cfg = cfg or self.config
        long = as_latent(long)
        if cfg.max_merge == 0.0:
            return long.copy()

        rng = rng or SeededRng(cfg.seed, FRESH_STREAM)
        _, _, length, height, width = long.shape
        mask = butterworth_mask(length, height, width,
                                order=cfg.butterworth_order,
                                temporal_cutoff=cfg.temporal_cutoff,
                                spatial_cutoff=cfg.spatial_cutoff)
        fresh = randn(long.shape, rng)

        low, high = split_frequency(long, mask)
        _, fresh_high = split_frequency(fresh, mask)

        ramp = np.linspace(0.0, cfg.max_merge, length).reshape(1, 1, length, 1, 1)
        if cfg.swap_ramp_weights:
            ramp = 1.0 - ramp

        if cfg.blend_mode == BlendMode.TIME_RAMP:
            low_part = ifft3(low).astype(np.float64)
            high_part = ifft3(high).astype(np.float64)
            fresh_part = ifft3(fresh_high).astype(np.float64)
            blended = low_part + normalized_blend(high_part, fresh_part, ramp)
        else:
            blended = ifft3(low + normalized_blend(high, fresh_high, ramp), strict=False)

        return blended.astype(np.float32)

    def init_long_noise(self, cfg: Optional[NoiseInitConfig] = None) -> LatentTensor:
        """Short noise -> replicate -> shuffle strides -> high-frequency blend"""
        cfg = cfg or self.config
        try:
            short = randn(cfg.short_shape, SeededRng(cfg.seed, INIT_STREAM))
            long = self.replicate_noise(short, cfg.replication)
            long = self.shuffle_strides(long, cfg.tile_frames, cfg.overlap, SeededRng(cfg.seed, SHUFFLE_STREAM))
            long = self.blend_high_frequency(long, cfg, SeededRng(cfg.seed, FRESH_STREAM))
            self.logger.info(
                f"Initialized long noise {long.shape} "
                f"(t={cfg.tile_frames}, o={cfg.overlap}, n={cfg.replication}, "
                f"w_max={cfg.max_merge}, mode={cfg.blend_mode.value})"
            )
            return long
        except Exception as e:
            self.logger.error(f"Error initializing long noise: {str(e)}")
            raise

    def fresh_long_noise(self, cfg: Optional[NoiseInitConfig] = None) -> LatentTensor:
        """I.i.d. long noise, the initialization used when long noise init is disabled"""
        cfg = cfg or self.config
        return randn(cfg.long_shape, SeededRng(cfg.seed, IID_STREAM))
