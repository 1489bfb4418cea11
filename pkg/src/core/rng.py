from dataclasses import dataclass, field
from typing import Sequence
import numpy as np

from ..utils.error_handler import InvalidParameterError

MAX_SEED = 2 ** 64


@dataclass
class SeededRng:
    """
    Named random stream derived from a 64-bit seed.

    The same (seed, stream) pair yields the same sequence on every platform
    (PCG64 seeded through SeedSequence); different stream labels of one seed
    are independent streams. The generator is created on first use and is
    owned by this handle, so pass handles, not generators, between callers.
    """
    seed: int
    stream: str = 'default'
    _generator: np.random.Generator = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise InvalidParameterError(f"Seed must be an integer, got {self.seed!r}")
        if not 0 <= int(self.seed) < MAX_SEED:
            raise InvalidParameterError(f"Seed must lie in [0, 2**64), got {self.seed}")
        self.seed = int(self.seed)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            sequence = np.random.SeedSequence(
                entropy=self.seed,
                spawn_key=tuple(self.stream.encode('utf-8'))
            )
            self._generator = np.random.Generator(np.random.PCG64(sequence))
        return self._generator

    def spawn(self, stream: str) -> 'SeededRng':
        """Fresh handle on another stream of the same seed"""
        return SeededRng(self.seed, stream)

    def standard_normal(self, shape: Sequence[int]) -> np.ndarray:
        return self.generator.standard_normal(tuple(shape), dtype=np.float32)

    def permutation(self, values: np.ndarray) -> np.ndarray:
        return self.generator.permutation(values)
