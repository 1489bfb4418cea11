from abc import ABC, abstractmethod
import numpy as np

from ..utils.error_handler import InvalidShapeError

PATCH_GRID = 4


def as_frame(frame: np.ndarray) -> np.ndarray:
    """(height, width) or (channel, height, width) frame as float64 (C, H, W)"""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 2:
        return frame[None]
    if frame.ndim != 3:
        raise InvalidShapeError(f"A frame has 2 or 3 axes, got shape {frame.shape}")
    return frame


class FrameFeatureExtractor(ABC):
    """Deterministic map from one frame to a feature vector of fixed length"""

    name = 'extractor'

    @abstractmethod
    def embed(self, frame: np.ndarray) -> np.ndarray:
        ...


class PatchStatisticsExtractor(FrameFeatureExtractor):
    """Per channel: 4x4 grid of patch means, then the channel standard deviation"""

    name = 'patch-statistics'

    def __init__(self, grid: int = PATCH_GRID):
        self.grid = grid

    def embed(self, frame):
        frame = as_frame(frame)
        channels, height, width = frame.shape
        # Small frames get a coarser grid so no patch is empty
        rows = np.array_split(np.arange(height), min(self.grid, height))
        cols = np.array_split(np.arange(width), min(self.grid, width))

        patch_means = np.array([
            [[frame[c][np.ix_(r, k)].mean() for k in cols] for r in rows]
            for c in range(channels)
        ]).reshape(channels, -1)
        stds = frame.reshape(channels, -1).std(axis=1)
        return np.concatenate([patch_means.ravel(), stds])


class ChannelMomentsExtractor(FrameFeatureExtractor):
    """Per channel: mean, standard deviation and mean absolute spatial gradient"""

    name = 'channel-moments'

    def embed(self, frame):
        frame = as_frame(frame)
        channels = frame.shape[0]
        flat = frame.reshape(channels, -1)
        gradients = []
        for c in range(channels):
            parts = [np.abs(np.diff(frame[c], axis=axis)).ravel()
                     for axis in (0, 1) if frame.shape[axis + 1] > 1]
            gradients.append(np.concatenate(parts).mean() if parts else 0.0)
        return np.concatenate([flat.mean(axis=1), flat.std(axis=1), np.array(gradients)])
