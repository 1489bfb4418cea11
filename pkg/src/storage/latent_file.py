"""
VMLT latent container.

Layout, all little-endian:

    magic    4 bytes  b'VMLT'
    version  u16      1
    extents  5 x u32  batch, channel, frames, height, width
    payload  f32      row-major, product(extents) values
    checksum u64      FNV-1a-64 of the payload bytes
"""
from pathlib import Path
from typing import Tuple, Union
import logging
import struct
import numpy as np

from ..core.tensor_ops import LatentTensor, validate_shape
from ..utils.error_handler import ChecksumError, InvalidShapeError, LatentFormatError

logger = logging.getLogger(__name__)

MAGIC = b'VMLT'
VERSION = 1
HEADER = struct.Struct('<4sH5I')
TRAILER = struct.Struct('<Q')

FNV_OFFSET_BASIS = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
_MASK_64 = 0xffffffffffffffff


def fnv1a_64(data: Union[bytes, memoryview], value: int = FNV_OFFSET_BASIS) -> int:
    """
    64-bit FNV-1a hash

    Pass the previous result as `value` to continue a hash over a further chunk.
    The byte loop runs in Python, roughly 0.2 s per MB of payload.
    """
    prime = FNV_PRIME
    mask = _MASK_64
    for byte in memoryview(data).cast('B'):
        value = ((value ^ byte) * prime) & mask
    return value


def format_checksum(value: int) -> str:
    return f"{value:016x}"


def encode_latent(tensor: LatentTensor) -> Tuple[bytes, int]:
    """Serialized container and payload checksum"""
    tensor = np.asarray(tensor)
    if np.iscomplexobj(tensor):
        raise InvalidShapeError("Latent tensors are real-valued")
    extents = validate_shape(tensor.shape)
    payload = np.ascontiguousarray(tensor, dtype='<f4').tobytes()
    checksum = fnv1a_64(payload)
    return HEADER.pack(MAGIC, VERSION, *extents) + payload + TRAILER.pack(checksum), checksum


def decode_latent(data: bytes) -> Tuple[LatentTensor, int]:
    """Tensor and verified checksum of a serialized container"""
    if len(data) < HEADER.size + TRAILER.size:
        raise LatentFormatError(f"File too short for a VMLT container ({len(data)} bytes)")
    magic, version, *extents = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise LatentFormatError(f"Bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise LatentFormatError(f"Unsupported VMLT version {version}")
    try:
        extents = validate_shape(extents)
    except InvalidShapeError as e:
        raise LatentFormatError(f"Invalid extents in header: {str(e)}") from e

    payload_size = int(np.prod(extents, dtype=object)) * 4
    expected = HEADER.size + payload_size + TRAILER.size
    if len(data) != expected:
        raise LatentFormatError(f"File is {len(data)} bytes, header implies {expected}")

    payload = memoryview(data)[HEADER.size:HEADER.size + payload_size]
    (stored,) = TRAILER.unpack_from(data, HEADER.size + payload_size)
    actual = fnv1a_64(payload)
    if actual != stored:
        raise ChecksumError(
            f"Checksum mismatch: stored {format_checksum(stored)}, computed {format_checksum(actual)}"
        )
    tensor = np.frombuffer(payload, dtype='<f4').astype(np.float32).reshape(extents)
    return tensor, stored


def write_latent(path: Union[str, Path], tensor: LatentTensor) -> str:
    """Write a tensor; returns the payload checksum as 16 hex digits"""
    data, checksum = encode_latent(tensor)
    Path(path).write_bytes(data)
    logger.info(f"Wrote {path} shape={tuple(np.shape(tensor))} checksum={format_checksum(checksum)}")
    return format_checksum(checksum)


def load_latent(path: Union[str, Path]) -> Tuple[LatentTensor, str]:
    """Read and verify a tensor; also returns its payload checksum as 16 hex digits"""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise LatentFormatError(f"Cannot read {path}: {e.strerror or str(e)}") from e
    tensor, checksum = decode_latent(data)
    return tensor, format_checksum(checksum)


def read_latent(path: Union[str, Path]) -> LatentTensor:
    """Read and verify a tensor"""
    return load_latent(path)[0]


def file_checksum(path: Union[str, Path]) -> str:
    """Verified payload checksum of a file"""
    return load_latent(path)[1]
