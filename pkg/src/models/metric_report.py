from dataclasses import dataclass, field
from typing import Dict, Optional
import math

from ..utils.error_handler import InvalidParameterError

# Scalar names a report may carry
FLICKER = 'temporal_flicker'
SUBJECT_CONSISTENCY = 'subject_consistency'
BACKGROUND_CONSISTENCY = 'background_consistency'
IDENTITY_CONSISTENCY = 'identity_consistency'
FRECHET_DISTANCE = 'frechet_distance'
LOW_FREQ_SIMILARITY = 'low_freq_similarity'


@dataclass
class MetricReport:
    """Metric data model"""

    metrics: Dict[str, float] = field(default_factory=dict)

    # Run provenance
    seed: Optional[int] = None
    config_digest: Optional[str] = None
    source: Optional[str] = None
    parameters: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.metrics.items():
            self.metrics[name] = self._check(name, value)

    @staticmethod
    def _check(name: str, value: float) -> float:
        value = float(value)
        if not math.isfinite(value):
            raise InvalidParameterError(f"Metric {name} is not finite ({value})")
        return value

    def add(self, name: str, value: float) -> None:
        self.metrics[name] = self._check(name, value)

    def to_dict(self) -> Dict[str, object]:
        return {
            'metrics': dict(self.metrics),
            'seed': self.seed,
            'config_digest': self.config_digest,
            'source': self.source,
            'parameters': dict(self.parameters),
        }
