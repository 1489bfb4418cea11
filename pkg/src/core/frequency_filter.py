from dataclasses import dataclass
from typing import Tuple
import numpy as np

from .tensor_ops import LatentTensor, ComplexTensor, fft3, as_latent
from ..utils.error_handler import InvalidParameterError, InvalidShapeError


@dataclass(frozen=True, eq=False)
class ButterworthMask:
    """Low-pass gain per 3D frequency bin, shape (frames, height, width)"""
    values: np.ndarray
    order: int = 4
    temporal_cutoff: float = 0.25
    spatial_cutoff: float = 0.25

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.values.shape)

    @classmethod
    def unit(cls, frames: int, height: int, width: int) -> 'ButterworthMask':
        """All-pass mask (every gain 1)"""
        return cls(values=np.ones((frames, height, width)), order=0,
                   temporal_cutoff=0.5, spatial_cutoff=0.5)


def normalized_frequency(length: int) -> np.ndarray:
    """min(k, N - k) / N for k = 0..N-1"""
    k = np.arange(length)
    return np.minimum(k, length - k) / length


def butterworth_gain(frequency: np.ndarray, cutoff: float, order: int) -> np.ndarray:
    """
    Squared-magnitude response 1 / (1 + (f/c)^(2m)), half power at the cutoff

    Gains that underflow at high orders are held at the smallest positive double.
    """
    with np.errstate(over='ignore'):
        gain = 1.0 / (1.0 + (frequency / cutoff) ** (2 * order))
    return np.maximum(gain, np.finfo(np.float64).tiny)


def butterworth_mask(frames: int,
                     height: int,
                     width: int,
                     order: int = 4,
                     temporal_cutoff: float = 0.25,
                     spatial_cutoff: float = 0.25
                     ) -> ButterworthMask:
    """
    Separable temporal x radial-spatial Butterworth low-pass mask

    Args:
        frames, height, width: Mask extents
        order: Filter order m >= 1
        temporal_cutoff: Half-power normalized temporal frequency in (0, 0.5]
        spatial_cutoff: Half-power normalized radial spatial frequency in (0, 0.5]

    Returns:
        ButterworthMask with gain 1 at zero frequency
    """
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise InvalidParameterError(f"Butterworth order must be a positive integer, got {order}")
    for name, cutoff in (('temporal_cutoff', temporal_cutoff), ('spatial_cutoff', spatial_cutoff)):
        if not 0.0 < cutoff <= 0.5:
            raise InvalidParameterError(f"{name} must lie in (0, 0.5], got {cutoff}")
    if min(frames, height, width) < 1:
        raise InvalidShapeError(f"Mask extents must be positive, got {(frames, height, width)}")

    f_t = normalized_frequency(frames)
    f_h = normalized_frequency(height)
    f_w = normalized_frequency(width)
    f_s = np.sqrt(f_h[:, None] ** 2 + f_w[None, :] ** 2)

    temporal = butterworth_gain(f_t, temporal_cutoff, int(order))
    spatial = butterworth_gain(f_s, spatial_cutoff, int(order))
    values = np.maximum(temporal[:, None, None] * spatial[None, :, :], np.finfo(np.float64).tiny)
    return ButterworthMask(values=values, order=int(order),
                           temporal_cutoff=float(temporal_cutoff),
                           spatial_cutoff=float(spatial_cutoff))


def split_frequency(x: LatentTensor, mask: ButterworthMask) -> Tuple[ComplexTensor, ComplexTensor]:
    """Split fft3(x) into low (X * P) and high (X * (1 - P)) parts"""
    x = as_latent(x)
    if tuple(x.shape[2:]) != mask.shape:
        raise InvalidShapeError(
            f"Mask shape {mask.shape} does not match latent (frames, height, width) {tuple(x.shape[2:])}"
        )
    spectrum = fft3(x)
    gain = mask.values[None, None]
    return spectrum * gain, spectrum * (1.0 - gain)
