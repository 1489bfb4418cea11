from typing import Dict, Iterable, List, Optional, Tuple
import logging
import math
import numpy as np
import pandas as pd

from ..core.tensor_ops import LatentTensor, as_latent
from ..models.configs import TileLayout
from ..utils.error_handler import (
    FrameIndexError, IncompletePredictionsError, InvalidShapeError
)


def omega(s: int, n: int) -> float:
    """Sine weight sin(s*pi/n + pi/(2n)) of in-tile offset s in [0, n)"""
    if not 0 <= s < n:
        raise FrameIndexError(f"In-tile offset {s} outside [0, {n})")
    return math.sin(s * math.pi / n + math.pi / (2 * n))


def sine_profile(n: int) -> np.ndarray:
    """omega(s, n) for s = 0..n-1"""
    return np.array([omega(s, n) for s in range(n)])


def covering_tiles(t: int, layout: TileLayout) -> List[int]:
    """Ascending indices of the tiles whose half-open frame range contains t"""
    if not 0 <= t < layout.long_length:
        raise FrameIndexError(f"Frame {t} outside [0, {layout.long_length})")
    first = max(0, (t - layout.tile_length) // layout.stride + 1)
    last = min(layout.tile_count - 1, t // layout.stride)
    return list(range(first, last + 1))


class FusionAccumulator:
    """
    Weighted accumulation of tile predictions in ascending tile order

    Predictions may arrive in any order; each is folded in only once every
    lower tile index has been folded, so the floating-point sum is the same
    whatever the arrival order. Out-of-order arrivals wait in a buffer.
    """

    def __init__(self, layout: TileLayout):
        self.logger = logging.getLogger('FusionAccumulator')
        self.layout = layout
        self.profile = sine_profile(layout.tile_length)
        self._sum: Optional[np.ndarray] = None
        self._weights = np.zeros(layout.long_length)
        self._pending: Dict[int, np.ndarray] = {}
        self._next_index = 0
        self._tile_shape: Optional[Tuple[int, ...]] = None

    @property
    def complete(self) -> bool:
        return self._next_index == self.layout.tile_count

    def add(self, tile_index: int, prediction: LatentTensor) -> None:
        if not 0 <= tile_index < self.layout.tile_count:
            raise IncompletePredictionsError(
                f"Prediction for unknown tile {tile_index} (layout has {self.layout.tile_count} tiles)"
            )
        if tile_index < self._next_index or tile_index in self._pending:
            raise IncompletePredictionsError(f"Duplicate prediction for tile {tile_index}")

        prediction = as_latent(prediction)
        batch, channels, frames, height, width = prediction.shape
        if frames != self.layout.tile_length:
            raise InvalidShapeError(
                f"Tile {tile_index} prediction has {frames} frames, expected {self.layout.tile_length}"
            )
        if self._tile_shape is None:
            self._tile_shape = prediction.shape
        elif prediction.shape != self._tile_shape:
            raise InvalidShapeError(
                f"Tile {tile_index} prediction shape {prediction.shape} differs from {self._tile_shape}"
            )

        self._pending[tile_index] = prediction
        while self._next_index in self._pending:
            self._fold(self._next_index, self._pending.pop(self._next_index))
            self._next_index += 1

    def _fold(self, tile_index: int, prediction: np.ndarray) -> None:
        if self._sum is None:
            batch, channels, _, height, width = prediction.shape
            self._sum = np.zeros((batch, channels, self.layout.long_length, height, width))
        window = self.layout.window(tile_index)
        weights = self.profile.reshape(1, 1, -1, 1, 1)
        self._sum[:, :, window.start:window.stop] += weights * prediction
        self._weights[window.start:window.stop] += self.profile

    def result(self) -> LatentTensor:
        if not self.complete:
            missing = sorted(set(range(self.layout.tile_count)) - set(range(self._next_index)) - set(self._pending))
            raise IncompletePredictionsError(f"Missing predictions for tiles {missing}")
        fused = self._sum / self._weights.reshape(1, 1, -1, 1, 1)
        return fused.astype(np.float32)


class LatentFusion:
    """Sine-weighted fusion of overlapping tile predictions into one long prediction"""

    def __init__(self):
        self.logger = logging.getLogger('LatentFusion')

    def fuse(self,
             tile_predictions: Iterable[Tuple[int, LatentTensor]],
             layout: TileLayout
             ) -> LatentTensor:
        """
        Fuse per-tile predictions

        Args:
            tile_predictions: (tile index, prediction of tile_length frames) pairs, any order
            layout: Tile geometry

        Returns:
            Long prediction where each frame is the omega-weighted mean of its covering tiles
        """
        try:
            accumulator = FusionAccumulator(layout)
            for tile_index, prediction in sorted(tile_predictions, key=lambda item: item[0]):
                accumulator.add(tile_index, prediction)
            return accumulator.result()
        except Exception as e:
            self.logger.error(f"Error fusing tile predictions: {str(e)}")
            raise

    def weight_table(self, layout: TileLayout) -> List[List[Tuple[int, float]]]:
        """Per frame, the (tile index, normalized weight) pairs fuse applies"""
        table = []
        for t in range(layout.long_length):
            tiles = covering_tiles(t, layout)
            raw = [omega(t - i * layout.stride, layout.tile_length) for i in tiles]
            total = sum(raw)
            table.append([(i, w / total) for i, w in zip(tiles, raw)])
        return table

    def weight_frame(self, layout: TileLayout) -> pd.DataFrame:
        """Long-format weight table: one row per (frame, covering tile)"""
        rows = []
        for t, entries in enumerate(self.weight_table(layout)):
            for tile_index, weight in entries:
                offset = t - tile_index * layout.stride
                rows.append({
                    'frame': t,
                    'tile': tile_index,
                    'offset': offset,
                    'omega': omega(offset, layout.tile_length),
                    'weight': weight
                })
        return pd.DataFrame(rows, columns=['frame', 'tile', 'offset', 'omega', 'weight'])
