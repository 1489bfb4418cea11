from itertools import combinations
from typing import List, Optional
import logging
import numpy as np
from scipy import linalg

from .feature_extractor import (
    ChannelMomentsExtractor, FrameFeatureExtractor, PatchStatisticsExtractor
)
from ..core.frequency_filter import ButterworthMask, split_frequency
from ..core.tensor_ops import LatentTensor, as_latent, ifft3
from ..models.configs import TileLayout
from ..models import metric_report as names
from ..models.metric_report import MetricReport
from ..utils.error_handler import (
    InsufficientFramesError, InsufficientWindowsError, InvalidInputError,
    InvalidParameterError, InvalidShapeError, VideoMergeError
)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two vectors; 0 when either is the zero vector"""
    a = np.ravel(a).astype(np.float64)
    b = np.ravel(b).astype(np.float64)
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0.0:
        return 0.0
    return float(np.dot(a, b) / norm)


def _require_frames(video: np.ndarray, minimum: int = 2) -> np.ndarray:
    video = as_latent(video)
    if video.shape[2] < minimum:
        raise InsufficientFramesError(f"Metric needs at least {minimum} frames, got {video.shape[2]}")
    return video


def _symmetric_sqrt(matrix: np.ndarray) -> np.ndarray:
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    return (eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.T


class MetricsCalculator:
    """
    Video quality metrics over latent tensors

    Every per-video score is computed for each batch element and averaged
    over the batch axis.
    """

    def __init__(self):
        self.logger = logging.getLogger('MetricsCalculator')

    def temporal_flicker(self, video: LatentTensor) -> float:
        """Mean absolute consecutive-frame difference divided by the value range, in [0, 1]"""
        video = _require_frames(video).astype(np.float64)
        scores = []
        for sample in video:
            value_range = sample.max() - sample.min()
            if value_range == 0.0:
                scores.append(0.0)
                continue
            pair_means = np.abs(np.diff(sample, axis=1)).mean(axis=(0, 2, 3))
            scores.append(pair_means.mean() / value_range)
        return float(np.mean(scores))

    def _embeddings(self, sample: np.ndarray, extractor: FrameFeatureExtractor) -> List[np.ndarray]:
        # sample: (C, F, H, W)
        return [extractor.embed(sample[:, f]) for f in range(sample.shape[1])]

    def pairwise_consistency(self,
                             video: LatentTensor,
                             extractor: Optional[FrameFeatureExtractor] = None
                             ) -> float:
        """Mean cosine similarity of consecutive frame embeddings"""
        video = _require_frames(video)
        extractor = extractor or PatchStatisticsExtractor()
        scores = []
        for sample in video:
            embeddings = self._embeddings(sample, extractor)
            scores.append(np.mean([cosine_similarity(a, b) for a, b in zip(embeddings, embeddings[1:])]))
        return float(np.mean(scores))

    def identity_consistency(self,
                             video: LatentTensor,
                             extractor: Optional[FrameFeatureExtractor],
                             tau: float
                             ) -> float:
        """
        Fraction of frames whose embedding lies within tau of the first frame's

        Args:
            video: Latent video with at least 2 frames
            extractor: Frame embedding, patch statistics when None
            tau: Strictly positive distance tolerance

        Returns:
            Count of frames f >= 1 with ||e(0) - e(f)|| < tau, divided by F - 1
        """
        if tau is None or not tau > 0:
            raise InvalidParameterError(f"Tolerance tau must be positive, got {tau}")
        video = _require_frames(video)
        extractor = extractor or PatchStatisticsExtractor()
        scores = []
        for sample in video:
            embeddings = self._embeddings(sample, extractor)
            anchor = embeddings[0]
            close = sum(np.linalg.norm(anchor - e) < tau for e in embeddings[1:])
            scores.append(close / (len(embeddings) - 1))
        return float(np.mean(scores))

    def frechet_distance(self, features_a: np.ndarray, features_b: np.ndarray) -> float:
        """
        Frechet distance between Gaussian fits of two feature sets

        Args:
            features_a: (samples, dim) array; a 1-D array is a set of scalars
            features_b: (samples, dim) array of the same dim

        Returns:
            ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), covariances with 1/(n-1)
        """
        a = np.asarray(features_a, dtype=np.float64)
        b = np.asarray(features_b, dtype=np.float64)
        a = a.reshape(-1, 1) if a.ndim == 1 else a
        b = b.reshape(-1, 1) if b.ndim == 1 else b
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
            raise InvalidShapeError(f"Feature sets must share one dimension, got {a.shape} and {b.shape}")
        if a.shape[0] < 2 or b.shape[0] < 2:
            raise InvalidInputError(
                f"Each feature set needs at least 2 samples, got {a.shape[0]} and {b.shape[0]}"
            )

        mean_term = float(np.sum((a.mean(axis=0) - b.mean(axis=0)) ** 2))
        cov_a = np.atleast_2d(np.cov(a, rowvar=False, ddof=1))
        cov_b = np.atleast_2d(np.cov(b, rowvar=False, ddof=1))

        sqrt_a = _symmetric_sqrt(cov_a)
        product = sqrt_a @ cov_b @ sqrt_a
        product = (product + product.T) / 2.0
        cross = np.sqrt(np.clip(linalg.eigh(product, eigvals_only=True), 0.0, None)).sum()

        distance = mean_term + np.trace(cov_a) + np.trace(cov_b) - 2.0 * cross
        return float(max(distance, 0.0))

    def frame_features(self,
                       video: LatentTensor,
                       extractor: Optional[FrameFeatureExtractor] = None
                       ) -> np.ndarray:
        """Per-frame embeddings of every batch element, shape (batch * frames, dim)"""
        video = as_latent(video)
        extractor = extractor or PatchStatisticsExtractor()
        return np.array([e for sample in video for e in self._embeddings(sample, extractor)])

    def low_freq_similarity(self, video: LatentTensor, layout: TileLayout, mask: ButterworthMask) -> float:
        """
        Mean cosine similarity between the low-frequency parts of all pairs
        of disjoint tile windows [k*n, (k+1)*n)
        """
        video = as_latent(video)
        n = layout.tile_length
        if video.shape[2] != layout.long_length:
            raise InvalidShapeError(
                f"Video has {video.shape[2]} frames, layout covers {layout.long_length}"
            )
        window_count = layout.long_length // n
        if window_count < 2:
            raise InsufficientWindowsError(
                f"{layout.long_length} frames hold {window_count} disjoint windows of {n}; need 2"
            )

        lows = []
        for k in range(window_count):
            low, _ = split_frequency(video[:, :, k * n:(k + 1) * n], mask)
            lows.append(ifft3(low).astype(np.float64))

        scores = []
        for b in range(video.shape[0]):
            pairs = [cosine_similarity(lows[i][b], lows[j][b]) for i, j in combinations(range(window_count), 2)]
            scores.append(np.mean(pairs))
        return float(np.mean(scores))

    def max_abs_difference(self, a: LatentTensor, b: LatentTensor) -> float:
        a = as_latent(a)
        b = as_latent(b)
        if a.shape != b.shape:
            raise InvalidShapeError(f"Cannot diff shapes {a.shape} and {b.shape}")
        return float(np.max(np.abs(a.astype(np.float64) - b)))

    def build_report(self,
                     video: LatentTensor,
                     tau: Optional[float] = None,
                     reference: Optional[LatentTensor] = None,
                     layout: Optional[TileLayout] = None,
                     mask: Optional[ButterworthMask] = None,
                     seed: Optional[int] = None,
                     config_digest: Optional[str] = None,
                     source: Optional[str] = None
                     ) -> MetricReport:
        """
        Compute every metric whose inputs are available

        Identity consistency needs tau, Frechet distance a reference video and
        low-frequency similarity a layout plus mask. Metrics whose
        preconditions fail are left out with a warning.
        """
        subject = PatchStatisticsExtractor()
        background = ChannelMomentsExtractor()
        report = MetricReport(seed=seed, config_digest=config_digest, source=source,
                              parameters={'tau': tau,
                                          'subject_features': subject.name,
                                          'background_features': background.name})

        steps = {
            names.FLICKER: lambda: self.temporal_flicker(video),
            names.SUBJECT_CONSISTENCY: lambda: self.pairwise_consistency(video, subject),
            names.BACKGROUND_CONSISTENCY: lambda: self.pairwise_consistency(video, background),
        }
        if tau is not None:
            steps[names.IDENTITY_CONSISTENCY] = lambda: self.identity_consistency(video, subject, tau)
        else:
            self.logger.warning("No tau given; identity consistency skipped")
        if reference is not None:
            steps[names.FRECHET_DISTANCE] = lambda: self.frechet_distance(
                self.frame_features(reference, subject), self.frame_features(video, subject)
            )
        if layout is not None and mask is not None:
            steps[names.LOW_FREQ_SIMILARITY] = lambda: self.low_freq_similarity(video, layout, mask)

        for name, compute in steps.items():
            try:
                report.add(name, compute())
            except (InsufficientFramesError, InsufficientWindowsError, InvalidInputError) as e:
                self.logger.warning(f"Skipping {name}: {str(e)}")
            except VideoMergeError as e:
                self.logger.error(f"Error computing {name}: {str(e)}")
                raise
        return report
