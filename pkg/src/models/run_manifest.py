from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional
import json


@dataclass
class RunManifest:
    """Reproducibility record written beside a command's output"""

    command: str
    config_digest: str
    config: Dict[str, object]
    seed: int
    tool_version: str

    timings_s: Dict[str, float] = field(default_factory=dict)
    peak_rss_mb: Optional[float] = None
    metrics: Optional[Dict[str, object]] = None
    output_checksums: Dict[str, str] = field(default_factory=dict)
    refined_prompt: Optional[Dict[str, object]] = None

    @staticmethod
    def path_for(output: Path) -> Path:
        output = Path(output)
        return output.with_name(output.name + '.manifest.json')

    def to_dict(self) -> Dict[str, object]:
        return {
            'command': self.command,
            'config_digest': self.config_digest,
            'config': self.config,
            'seed': self.seed,
            'tool_version': self.tool_version,
            'timings_s': dict(self.timings_s),
            'peak_rss_mb': self.peak_rss_mb,
            'metrics': self.metrics,
            'output_checksums': dict(self.output_checksums),
            'refined_prompt': self.refined_prompt,
        }

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8')
        return path
