import pytest
import os
import sys
import numpy as np

# Add project root directory to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.rng import SeededRng
from src.models.configs import NoiseInitConfig, TileLayout


@pytest.fixture
def small_layout():
    """Four tiles of 8 frames overlapping by 4 (L = 20)"""
    return TileLayout(8, 4, 20)


@pytest.fixture
def default_layout():
    """16-frame tiles, overlap 12, 25 tiles (L = 112)"""
    return TileLayout.for_tile_count(16, 12, 25)


@pytest.fixture
def small_noise_config():
    return NoiseInitConfig(tile_frames=8, overlap=4, replication=3, channels=2, height=8, width=8, seed=3)


@pytest.fixture
def seeded_latent():
    """Factory for reproducible standard normal latents"""
    def make(shape, seed=0, stream='fixture'):
        return SeededRng(seed, stream).standard_normal(shape)
    return make


@pytest.fixture
def write_config(tmp_path):
    """Write YAML text to a config file and return its path"""
    def write(text, name='run.yaml'):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return write


def spatial_ramp_target(batch=1, channels=2, frames=112, height=8, width=8):
    """Time-constant target varying smoothly over space, values in [-1, 1]"""
    ys = np.linspace(-1.0, 1.0, height)[:, None]
    xs = np.linspace(-1.0, 1.0, width)[None, :]
    plane = (ys + xs) / 2.0
    target = np.broadcast_to(plane, (batch, channels, frames, height, width))
    return np.ascontiguousarray(target, dtype=np.float32)


@pytest.fixture
def ramp_target():
    return spatial_ramp_target
