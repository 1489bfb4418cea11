"""
Latent tensor construction and 3D Fourier transforms.

A latent tensor is a float32 numpy array with five axes
(batch, channel, frames, height, width). Complex tensors share the axis
convention. Transforms act on the (frames, height, width) axes of every
(batch, channel) slice; the forward transform is unnormalized and the
inverse carries the 1/(F*H*W) factor.
"""
from typing import Sequence, Tuple
import logging
import sys
import numpy as np
from scipy import fft as sp_fft

from .rng import SeededRng
from ..utils.error_handler import InvalidShapeError, NonRealResultError

logger = logging.getLogger(__name__)

LatentTensor = np.ndarray
ComplexTensor = np.ndarray

SPATIOTEMPORAL_AXES = (2, 3, 4)
MAX_EXTENT = 2 ** 32 - 1
IMAGINARY_TOLERANCE = 1e-4


def validate_shape(shape: Sequence[int]) -> Tuple[int, ...]:
    """Check a 5-axis shape and return it as a tuple of ints"""
    try:
        extents = tuple(int(extent) for extent in shape)
    except (TypeError, ValueError):
        raise InvalidShapeError(f"Shape must be a sequence of integers, got {shape!r}")
    if len(extents) != 5:
        raise InvalidShapeError(f"Expected 5 extents (batch, channel, frames, height, width), got {extents}")
    if any(extent < 1 or extent > MAX_EXTENT for extent in extents):
        raise InvalidShapeError(f"Every extent must lie in [1, 2**32 - 1], got {extents}")
    if np.prod(extents, dtype=object) * 4 > sys.maxsize:
        raise InvalidShapeError(f"Shape {extents} overflows the addressable size")
    return extents


def as_latent(x: np.ndarray) -> LatentTensor:
    """Validate a latent tensor: five axes, finite, float32"""
    x = np.asarray(x)
    validate_shape(x.shape)
    if np.iscomplexobj(x):
        raise InvalidShapeError("Latent tensors are real-valued")
    latent = x.astype(np.float32, copy=False)
    if not np.all(np.isfinite(latent)):
        raise InvalidShapeError("Latent tensor contains NaN or Inf values")
    return latent


def randn(shape: Sequence[int], rng: SeededRng) -> LatentTensor:
    """I.i.d. standard normal latent, deterministic for a given rng state"""
    return rng.standard_normal(validate_shape(shape))


def fft3(x: LatentTensor) -> ComplexTensor:
    """Unnormalized 3D DFT over the frame, height and width axes"""
    x = as_latent(x)
    return sp_fft.fftn(x.astype(np.float64), axes=SPATIOTEMPORAL_AXES)


def ifft3(x: ComplexTensor, strict: bool = True) -> LatentTensor:
    """
    Inverse 3D DFT returning the real part.

    Args:
        x: Complex spectrum, expected to be Hermitian-symmetric
        strict: Raise when the imaginary residue exceeds 1e-4 of the real
            part's magnitude; otherwise discard it

    Returns:
        float32 latent tensor
    """
    x = np.asarray(x)
    validate_shape(x.shape)
    spatial = sp_fft.ifftn(x, axes=SPATIOTEMPORAL_AXES)
    real_peak = float(np.max(np.abs(spatial.real))) if spatial.size else 0.0
    imag_peak = float(np.max(np.abs(spatial.imag))) if spatial.size else 0.0
    if imag_peak > IMAGINARY_TOLERANCE * real_peak:
        if strict:
            raise NonRealResultError(
                f"Inverse transform is not real: imaginary peak {imag_peak:.3e} "
                f"vs real peak {real_peak:.3e}"
            )
        logger.debug(f"Discarding imaginary residue {imag_peak:.3e} (real peak {real_peak:.3e})")
    return spatial.real.astype(np.float32)
