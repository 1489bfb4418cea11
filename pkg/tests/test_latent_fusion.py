import math
import pytest
import numpy as np
from src.analysis.latent_fusion import (
    FusionAccumulator, LatentFusion, covering_tiles, omega, sine_profile
)
from src.core.rng import SeededRng
from src.models.configs import TileLayout
from src.utils.error_handler import (
    FrameIndexError, IncompletePredictionsError, InvalidParameterError, InvalidShapeError
)


def sweep_layouts(max_length=256):
    layouts = []
    for n in (8, 16):
        for o in sorted({0, 2, n // 2, n - 4, n - 1}):
            stride = n - o
            for m in range(1, (max_length - n) // stride + 2):
                layouts.append(TileLayout.for_tile_count(n, o, m))
    return layouts


def brute_force_fuse(predictions, layout):
    shape = list(predictions[0].shape)
    shape[2] = layout.long_length
    out = np.zeros(shape)
    for t in range(layout.long_length):
        acc = np.zeros(shape[:2] + shape[3:])
        total = 0.0
        for i in range(layout.tile_count):
            s = t - i * layout.stride
            if 0 <= s < layout.tile_length:
                w = omega(s, layout.tile_length)
                acc += w * predictions[i][:, :, s]
                total += w
        out[:, :, t] = acc / total
    return out


class TestTileLayout:
    def test_default_geometry(self):
        layout = TileLayout.for_tile_count(16, 12, 25)
        assert layout.long_length == 112
        assert layout.stride == 4
        assert layout.tile_count == 25
        assert TileLayout(16, 12, 16 * 7).tile_count == 25

    def test_windows(self, small_layout):
        assert [(w.start, w.stop) for w in small_layout.windows()] == [(0, 8), (4, 12), (8, 16), (12, 20)]
        with pytest.raises(FrameIndexError):
            small_layout.window(4)

    @pytest.mark.parametrize('args', [(8, 8, 16), (8, 2, 17), (8, 2, 4), (0, 0, 8)])
    def test_invalid(self, args):
        with pytest.raises(InvalidParameterError):
            TileLayout(*args)


class TestSineWeights:
    def test_omega_formula(self):
        n = 16
        for s in range(n):
            assert omega(s, n) == pytest.approx(math.sin(s * math.pi / n + math.pi / (2 * n)))
        # Symmetric, small at the edges, largest mid-tile
        profile = sine_profile(n)
        assert np.allclose(profile, profile[::-1])
        assert profile.argmax() in (n // 2 - 1, n // 2)
        assert profile.min() > 0

    def test_omega_out_of_range(self):
        with pytest.raises(FrameIndexError):
            omega(8, 8)

    def test_covering_tiles(self, small_layout):
        assert covering_tiles(0, small_layout) == [0]
        assert covering_tiles(4, small_layout) == [0, 1]
        assert covering_tiles(7, small_layout) == [0, 1]
        assert covering_tiles(19, small_layout) == [3]
        with pytest.raises(FrameIndexError):
            covering_tiles(20, small_layout)

    def test_covering_tiles_matches_scan(self):
        for layout in sweep_layouts(64):
            for t in range(layout.long_length):
                expected = [w.index for w in layout.windows() if w.start <= t < w.stop]
                assert covering_tiles(t, layout) == expected


class TestLatentFusion:
    @pytest.fixture
    def fusion(self):
        return LatentFusion()

    def test_partition_of_unity(self, fusion):
        for layout in sweep_layouts():
            for entries in fusion.weight_table(layout):
                assert abs(sum(w for _, w in entries) - 1.0) < 1e-9

    def test_no_overlap_gives_unit_weights(self, fusion):
        layout = TileLayout(16, 0, 112)
        table = fusion.weight_table(layout)
        assert len(table) == 112
        assert all(len(entries) == 1 and entries[0][1] == 1.0 for entries in table)

    def test_weight_frame(self, fusion, default_layout):
        frame = fusion.weight_frame(default_layout)
        assert list(frame.columns) == ['frame', 'tile', 'offset', 'omega', 'weight']
        assert frame['frame'].nunique() == 112
        assert np.allclose(frame.groupby('frame')['weight'].sum(), 1.0, atol=1e-9)

    def test_matches_brute_force(self, fusion):
        layouts = sweep_layouts()
        rng = SeededRng(2024, 'fusion-oracle')
        for k in range(200):
            layout = layouts[int(rng.generator.integers(len(layouts)))]
            predictions = [rng.standard_normal((1, 2, layout.tile_length, 2, 2)) for _ in range(layout.tile_count)]
            fused = fusion.fuse(list(enumerate(predictions)), layout)
            assert np.max(np.abs(fused - brute_force_fuse(predictions, layout))) < 1e-6

    def test_single_cover_frames_are_exact(self, fusion):
        layout = TileLayout(8, 2, 20)
        rng = SeededRng(1)
        predictions = [rng.standard_normal((1, 1, 8, 3, 3)) for _ in range(layout.tile_count)]
        fused = fusion.fuse(list(enumerate(predictions)), layout)
        # Frames 0..5 are covered by tile 0 alone
        assert np.array_equal(fused[:, :, :6], predictions[0][:, :, :6])

    def test_constant_predictions_stay_constant(self, fusion, default_layout):
        predictions = [(i, np.full((1, 1, 16, 2, 2), 3.0, dtype=np.float32)) for i in range(25)]
        assert np.allclose(fusion.fuse(predictions, default_layout), 3.0, atol=1e-6)

    def test_arrival_order_is_irrelevant(self, default_layout):
        for seed in range(10):
            rng = SeededRng(seed, 'arrival')
            predictions = [rng.standard_normal((1, 2, 16, 4, 4)) for _ in range(25)]
            in_order = FusionAccumulator(default_layout)
            for i, p in enumerate(predictions):
                in_order.add(i, p)
            shuffled = FusionAccumulator(default_layout)
            for i in rng.permutation(np.arange(25)):
                shuffled.add(int(i), predictions[i])
            assert np.array_equal(in_order.result(), shuffled.result())

    def test_missing_and_duplicate_predictions(self, fusion, small_layout):
        tile = np.zeros((1, 1, 8, 2, 2), dtype=np.float32)
        with pytest.raises(IncompletePredictionsError):
            fusion.fuse([(0, tile), (1, tile), (3, tile)], small_layout)
        accumulator = FusionAccumulator(small_layout)
        accumulator.add(0, tile)
        with pytest.raises(IncompletePredictionsError):
            accumulator.add(0, tile)
        with pytest.raises(IncompletePredictionsError):
            accumulator.add(7, tile)

    def test_prediction_shape_checks(self, small_layout):
        accumulator = FusionAccumulator(small_layout)
        with pytest.raises(InvalidShapeError):
            accumulator.add(0, np.zeros((1, 1, 7, 2, 2)))
        accumulator.add(0, np.zeros((1, 1, 8, 2, 2)))
        with pytest.raises(InvalidShapeError):
            accumulator.add(1, np.zeros((1, 2, 8, 2, 2)))
