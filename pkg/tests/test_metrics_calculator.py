import pytest
import numpy as np
from src.analysis.feature_extractor import (
    ChannelMomentsExtractor, FrameFeatureExtractor, PatchStatisticsExtractor
)
from src.analysis.metrics_calculator import MetricsCalculator, cosine_similarity
from src.core.frequency_filter import ButterworthMask, butterworth_mask
from src.core.rng import SeededRng
from src.models.configs import TileLayout
from src.models.metric_report import FLICKER, IDENTITY_CONSISTENCY, LOW_FREQ_SIMILARITY
from src.utils.error_handler import (
    InsufficientFramesError, InsufficientWindowsError, InvalidInputError,
    InvalidParameterError, InvalidShapeError
)


def video_from_frames(frames):
    """(F, H, W) frames -> (1, 1, F, H, W) latent"""
    return np.asarray(frames, dtype=np.float32)[None, None]


class OneHotExtractor(FrameFeatureExtractor):
    """Embedding = the frame's first row, for hand-constructed cases"""

    def embed(self, frame):
        return np.asarray(frame, dtype=np.float64).reshape(-1, frame.shape[-1])[0]


class TestFeatureExtractors:
    def test_patch_statistics_length(self):
        extractor = PatchStatisticsExtractor()
        assert extractor.embed(np.zeros((3, 16, 16))).shape == (3 * 17,)
        assert extractor.embed(np.zeros((8, 8))).shape == (17,)

    def test_patch_statistics_values(self):
        frame = np.zeros((1, 8, 8))
        frame[0, :2, :2] = 4.0
        embedding = PatchStatisticsExtractor().embed(frame)
        assert embedding[0] == pytest.approx(4.0)
        assert np.all(embedding[1:16] == 0)
        assert embedding[16] == pytest.approx(np.std(frame))

    def test_channel_moments(self):
        frame = np.stack([np.full((4, 4), 2.0), np.tile(np.arange(4.0), (4, 1))])
        mean, _, std, _, grad_constant, grad_ramp = (
            ChannelMomentsExtractor().embed(frame)[[0, 1, 2, 3, 4, 5]]
        )
        assert mean == pytest.approx(2.0)
        assert std == pytest.approx(0.0)
        assert grad_constant == pytest.approx(0.0)
        # Ramp along width: |dx| = 1 on 12 pairs, |dy| = 0 on 12 pairs
        assert grad_ramp == pytest.approx(0.5)

    def test_bad_frame_rank(self):
        with pytest.raises(InvalidShapeError):
            PatchStatisticsExtractor().embed(np.zeros(5))


class TestMetricsCalculator:
    @pytest.fixture
    def calculator(self):
        return MetricsCalculator()

    def test_flicker_examples(self, calculator):
        assert calculator.temporal_flicker(np.full((1, 2, 5, 3, 3), 0.3)) == 0.0
        alternating = video_from_frames([np.full((2, 2), k % 2) for k in range(6)])
        assert calculator.temporal_flicker(alternating) == pytest.approx(1.0)
        frames = 9
        ramp = video_from_frames([np.full((2, 2), k / (frames - 1)) for k in range(frames)])
        assert abs(calculator.temporal_flicker(ramp) - 1 / (frames - 1)) < 1e-7

    def test_flicker_offset_invariant(self, calculator, seeded_latent):
        video = seeded_latent((2, 2, 6, 4, 4))
        assert calculator.temporal_flicker(video + 5.0) == pytest.approx(calculator.temporal_flicker(video), rel=1e-5)

    def test_single_frame(self, calculator):
        video = np.zeros((1, 1, 1, 4, 4))
        with pytest.raises(InsufficientFramesError):
            calculator.temporal_flicker(video)
        with pytest.raises(InsufficientFramesError):
            calculator.pairwise_consistency(video)
        with pytest.raises(InsufficientFramesError):
            calculator.identity_consistency(video, None, 1.0)

    def test_pairwise_consistency(self, calculator, seeded_latent):
        constant = np.full((1, 2, 4, 8, 8), 0.5)
        assert calculator.pairwise_consistency(constant) == pytest.approx(1.0)

        orthogonal = video_from_frames([np.eye(2)[k % 2][None].repeat(2, axis=0) for k in range(4)])
        assert calculator.pairwise_consistency(orthogonal, OneHotExtractor()) == pytest.approx(0.0)

        video = seeded_latent((1, 2, 7, 8, 8))
        reversed_video = video[:, :, ::-1]
        assert calculator.pairwise_consistency(video) == pytest.approx(
            calculator.pairwise_consistency(reversed_video), abs=1e-12
        )

    def test_zero_embeddings_count_as_dissimilar(self, calculator):
        assert cosine_similarity(np.zeros(3), np.ones(3)) == 0.0
        zeros = np.zeros((1, 1, 3, 4, 4))
        assert calculator.pairwise_consistency(zeros, OneHotExtractor()) == 0.0

    def test_identity_consistency_half(self, calculator):
        anchor = np.zeros((4, 4))
        far = np.full((4, 4), 10.0)
        video = video_from_frames([anchor, anchor, far, anchor, far])
        assert calculator.identity_consistency(video, OneHotExtractor(), tau=1.0) == 0.5

    def test_identity_consistency_extremes(self, calculator, seeded_latent):
        identical = np.repeat(seeded_latent((1, 1, 1, 8, 8)), 5, axis=2)
        assert calculator.identity_consistency(identical, None, 1e-9) == 1.0
        jittered = identical + 0.1 * seeded_latent((1, 1, 5, 8, 8), seed=4)
        assert calculator.identity_consistency(jittered, None, 1e-6) == 0.0
        with pytest.raises(InvalidParameterError):
            calculator.identity_consistency(jittered, None, 0.0)

    def test_identity_consistency_monotone_in_tau(self, calculator, seeded_latent):
        video = seeded_latent((1, 2, 12, 8, 8))
        scores = [calculator.identity_consistency(video, None, tau) for tau in np.linspace(0.01, 5, 30)]
        assert all(a <= b for a, b in zip(scores, scores[1:]))

    def test_frechet_identical_and_symmetric(self, calculator):
        rng = SeededRng(3, 'frechet')
        for dim in (1, 4, 16):
            a = rng.standard_normal((40, dim)).astype(np.float64)
            b = 0.5 + 2.0 * rng.standard_normal((30, dim)).astype(np.float64)
            assert calculator.frechet_distance(a, a) < 1e-6
            assert abs(calculator.frechet_distance(a, b) - calculator.frechet_distance(b, a)) < 1e-9

    def test_frechet_one_dimensional_closed_form(self, calculator):
        rng = SeededRng(5, 'frechet-1d')
        for _ in range(50):
            a = rng.standard_normal((int(rng.generator.integers(2, 30)),)).astype(np.float64) * 2.0 + 1.0
            b = rng.standard_normal((int(rng.generator.integers(2, 30)),)).astype(np.float64)
            expected = (a.mean() - b.mean()) ** 2 + (a.std(ddof=1) - b.std(ddof=1)) ** 2
            assert abs(calculator.frechet_distance(a, b) - expected) < 1e-6

    def test_frechet_unit_mean_shift(self, calculator):
        a = np.array([-1.0, 1.0, -1.0, 1.0])
        assert calculator.frechet_distance(a, a + 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_frechet_errors(self, calculator):
        with pytest.raises(InvalidShapeError):
            calculator.frechet_distance(np.zeros((4, 2)), np.zeros((4, 3)))
        with pytest.raises(InvalidInputError):
            calculator.frechet_distance(np.zeros((1, 2)), np.zeros((4, 2)))

    def test_low_freq_similarity_copies(self, calculator, seeded_latent):
        tile = seeded_latent((1, 2, 8, 8, 8))
        video = np.concatenate([tile] * 4, axis=2)
        layout = TileLayout(8, 4, 32)
        assert calculator.low_freq_similarity(video, layout, butterworth_mask(8, 8, 8)) == pytest.approx(1.0, abs=1e-6)

        jitter = 0.05 * seeded_latent(video.shape, seed=9)
        jittered = video + jitter
        assert calculator.low_freq_similarity(jittered, layout, butterworth_mask(8, 8, 8)) > 0.9

    def test_low_freq_similarity_iid_noise(self, calculator, seeded_latent):
        layout = TileLayout(16, 12, 112)
        video = seeded_latent((1, 1, 112, 16, 16), seed=12)
        score = calculator.low_freq_similarity(video, layout, butterworth_mask(16, 16, 16))
        # 21 window pairs, each roughly N(0, 1 / effective dimension)
        assert abs(score) < 0.1

    def test_low_freq_similarity_errors(self, calculator, seeded_latent):
        with pytest.raises(InsufficientWindowsError):
            calculator.low_freq_similarity(seeded_latent((1, 1, 12, 4, 4)), TileLayout(8, 4, 12),
                                           ButterworthMask.unit(8, 4, 4))
        with pytest.raises(InvalidShapeError):
            calculator.low_freq_similarity(seeded_latent((1, 1, 16, 4, 4)), TileLayout(8, 4, 20),
                                           ButterworthMask.unit(8, 4, 4))

    def test_frame_features(self, calculator, seeded_latent):
        features = calculator.frame_features(seeded_latent((2, 3, 5, 8, 8)))
        assert features.shape == (10, 3 * 17)

    def test_build_report(self, calculator, seeded_latent):
        video = seeded_latent((1, 2, 32, 8, 8))
        report = calculator.build_report(video, tau=2.0, reference=seeded_latent((1, 2, 32, 8, 8), seed=1),
                                         layout=TileLayout(8, 4, 32), mask=butterworth_mask(8, 8, 8),
                                         seed=7, config_digest='abc')
        assert set(report.metrics) == {
            'temporal_flicker', 'subject_consistency', 'background_consistency',
            'identity_consistency', 'frechet_distance', 'low_freq_similarity'
        }
        assert report.to_dict()['seed'] == 7
        assert report.parameters == {
            'tau': 2.0, 'subject_features': 'patch-statistics', 'background_features': 'channel-moments'
        }
        assert all(np.isfinite(v) for v in report.metrics.values())

    def test_build_report_skips_unavailable_metrics(self, calculator, seeded_latent):
        video = seeded_latent((1, 1, 12, 4, 4))
        report = calculator.build_report(video, layout=TileLayout(8, 4, 12), mask=ButterworthMask.unit(8, 4, 4))
        assert FLICKER in report.metrics
        assert IDENTITY_CONSISTENCY not in report.metrics
        assert LOW_FREQ_SIMILARITY not in report.metrics
