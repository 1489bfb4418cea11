from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, List, Tuple
import hashlib
import numpy as np

from ..utils.error_handler import InvalidParameterError, InvalidShapeError, FrameIndexError


class BlendMode(str, Enum):
    TIME_RAMP = 'time-ramp'
    LITERAL_FREQUENCY_RAMP = 'literal-frequency-ramp'


def _is_integer(value) -> bool:
    if isinstance(value, bool):
        return False
    try:
        return int(value) == value
    except (TypeError, ValueError):
        return False


def _require_positive_int(name: str, value) -> int:
    if not _is_integer(value) or value < 1:
        raise InvalidParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


@dataclass
class NoiseInitConfig:
    """Long noise initialization parameters"""

    # Tile geometry
    tile_frames: int = 16
    overlap: int = 12
    replication: int = 7

    # Latent extents besides frames
    batch: int = 1
    channels: int = 4
    height: int = 16
    width: int = 16

    # High-frequency blend
    max_merge: float = 0.1
    butterworth_order: int = 4
    temporal_cutoff: float = 0.25
    spatial_cutoff: float = 0.25
    blend_mode: BlendMode = BlendMode.TIME_RAMP
    swap_ramp_weights: bool = False  # literal symbol order of the pseudocode, tests only

    seed: int = 0

    def __post_init__(self):
        for name in ('tile_frames', 'replication', 'batch', 'channels', 'height', 'width', 'butterworth_order'):
            setattr(self, name, _require_positive_int(name, getattr(self, name)))
        if not _is_integer(self.overlap):
            raise InvalidParameterError(f"overlap must be an integer, got {self.overlap!r}")
        self.overlap = int(self.overlap)
        if not 0 <= self.overlap < self.tile_frames:
            raise InvalidParameterError(
                f"overlap must satisfy 0 <= overlap < tile_frames ({self.tile_frames}), got {self.overlap}"
            )
        if not 0.0 <= self.max_merge <= 1.0:
            raise InvalidParameterError(f"max_merge must lie in [0, 1], got {self.max_merge}")
        for name in ('temporal_cutoff', 'spatial_cutoff'):
            cutoff = getattr(self, name)
            if not 0.0 < cutoff <= 0.5:
                raise InvalidParameterError(f"{name} must lie in (0, 0.5], got {cutoff}")
        try:
            self.blend_mode = BlendMode(self.blend_mode)
        except ValueError:
            raise InvalidParameterError(
                f"blend_mode must be one of {[mode.value for mode in BlendMode]}, got {self.blend_mode!r}"
            )
        if not _is_integer(self.seed) or not 0 <= self.seed < 2 ** 64:
            raise InvalidParameterError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        self.seed = int(self.seed)

    @property
    def long_frames(self) -> int:
        return self.replication * self.tile_frames

    @property
    def short_shape(self) -> Tuple[int, int, int, int, int]:
        return (self.batch, self.channels, self.tile_frames, self.height, self.width)

    @property
    def long_shape(self) -> Tuple[int, int, int, int, int]:
        return (self.batch, self.channels, self.long_frames, self.height, self.width)


@dataclass(frozen=True)
class TileWindow:
    """Frames [start, stop) of the long latent covered by tile `index`"""
    index: int
    start: int
    stop: int


@dataclass(frozen=True)
class TileLayout:
    """
    Sliding-tile geometry over a long latent

    Tile i covers frames [i * stride, i * stride + tile_length) with
    stride = tile_length - overlap; the last tile ends exactly at long_length.
    """
    tile_length: int
    overlap: int
    long_length: int

    def __post_init__(self):
        _require_positive_int('tile_length', self.tile_length)
        _require_positive_int('long_length', self.long_length)
        if not _is_integer(self.overlap):
            raise InvalidParameterError(f"overlap must be an integer, got {self.overlap!r}")
        if not 0 <= self.overlap < self.tile_length:
            raise InvalidParameterError(
                f"overlap must satisfy 0 <= overlap < tile_length ({self.tile_length}), got {self.overlap}"
            )
        if self.long_length < self.tile_length:
            raise InvalidParameterError(
                f"long_length {self.long_length} is shorter than one tile ({self.tile_length})"
            )
        if (self.long_length - self.tile_length) % self.stride != 0:
            raise InvalidParameterError(
                f"long_length - tile_length ({self.long_length - self.tile_length}) "
                f"is not a multiple of the stride {self.stride}"
            )

    @classmethod
    def for_tile_count(cls, tile_length: int, overlap: int, tile_count: int) -> 'TileLayout':
        tile_count = _require_positive_int('tile_count', tile_count)
        return cls(tile_length, overlap, (tile_count - 1) * (tile_length - overlap) + tile_length)

    @property
    def stride(self) -> int:
        return self.tile_length - self.overlap

    @property
    def tile_count(self) -> int:
        return (self.long_length - self.tile_length) // self.stride + 1

    def window(self, index: int) -> TileWindow:
        if not 0 <= index < self.tile_count:
            raise FrameIndexError(f"Tile index {index} outside [0, {self.tile_count})")
        start = index * self.stride
        return TileWindow(index=index, start=start, stop=start + self.tile_length)

    def windows(self) -> List[TileWindow]:
        return [self.window(i) for i in range(self.tile_count)]


@dataclass(frozen=True)
class SigmaSchedule:
    """Strictly decreasing noise levels ending at exactly 0"""
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) < 2:
            raise InvalidParameterError("A schedule needs at least two noise levels")
        if values[-1] != 0.0:
            raise InvalidParameterError(f"Terminal noise level must be 0, got {values[-1]}")
        if any(later >= earlier for earlier, later in zip(values, values[1:])):
            raise InvalidParameterError("Noise levels must be strictly decreasing")
        object.__setattr__(self, 'values', values)

    @property
    def steps(self) -> int:
        return len(self.values) - 1

    def pairs(self) -> List[Tuple[float, float]]:
        return list(zip(self.values[:-1], self.values[1:]))


@dataclass(eq=False)
class ConditionVector:
    """Fixed-length conditioning embedding with its source prompt"""
    embedding: np.ndarray
    prompt: str = ''

    def __post_init__(self):
        self.embedding = np.asarray(self.embedding, dtype=np.float32)
        if self.embedding.ndim != 1 or self.embedding.size == 0:
            raise InvalidShapeError(f"Condition embedding must be a nonempty vector, got shape {self.embedding.shape}")

    @classmethod
    def from_prompt(cls, prompt: str, dim: int = 16) -> 'ConditionVector':
        """Deterministic toy text embedding: unit-norm Gaussian vector seeded by the prompt hash"""
        dim = _require_positive_int('embedding_dim', dim)
        digest = hashlib.sha256(prompt.encode('utf-8')).digest()
        generator = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], 'little')))
        vector = generator.standard_normal(dim)
        return cls(embedding=vector / np.linalg.norm(vector), prompt=prompt)


@dataclass
class GenerationConfig:
    """Run-level hyperparameters of a tiled generation"""
    layout: TileLayout
    schedule: SigmaSchedule
    noise: NoiseInitConfig
    condition: ConditionVector
    parallel_tiles: bool = False
    max_in_flight: int = 4
    long_noise_init: bool = True

    def __post_init__(self):
        if self.layout.long_length != self.noise.long_frames:
            raise InvalidParameterError(
                f"Layout long length {self.layout.long_length} differs from the noise length "
                f"{self.noise.long_frames} (replication x tile_frames)"
            )
        self.max_in_flight = _require_positive_int('max_in_flight', self.max_in_flight)

    def to_dict(self) -> Dict:
        noise = asdict(self.noise)
        noise['blend_mode'] = self.noise.blend_mode.value
        return {
            'layout': asdict(self.layout),
            'schedule': list(self.schedule.values),
            'noise': noise,
            'condition': {'prompt': self.condition.prompt, 'embedding_dim': int(self.condition.embedding.size)},
            'parallel_tiles': self.parallel_tiles,
            'max_in_flight': self.max_in_flight,
            'long_noise_init': self.long_noise_init,
        }
