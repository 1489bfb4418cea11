from copy import deepcopy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union
import hashlib
import json
import logging
import yaml

from ..analysis.tiled_sampler import build_schedule
from ..models.configs import ConditionVector, GenerationConfig, NoiseInitConfig, TileLayout
from ..utils.error_handler import ConfigError, VideoMergeError

SCHEMA_VERSION = 1

DEFAULTS: Dict[str, object] = {
    'schema_version': SCHEMA_VERSION,
    'latent': {'batch': 1, 'channels': 4, 'height': 16, 'width': 16},
    'noise': {
        'tile_frames': 16, 'overlap': 12, 'replication': 7, 'max_merge': 0.1,
        'blend_mode': 'time-ramp', 'seed': 0,
        'butterworth': {'order': 4, 'temporal_cutoff': 0.25, 'spatial_cutoff': 0.25},
    },
    'sampling': {'steps': 30, 'parallel_tiles': False, 'max_in_flight': 4, 'long_noise_init': True},
    'condition': {'prompt': '', 'embedding_dim': 16},
    'metrics': {'tau': None, 'reference': None},
    'prompt_refine': {
        'enabled': False, 'category': 'human', 'timeout': 30.0,
        'model': 'gpt-4o-mini', 'max_output_tokens': 256,
    },
}

# Expected value kinds; keys absent here take the kind of their default
OPTIONAL_KINDS = {'metrics.tau': 'number', 'metrics.reference': 'string'}
FLOAT_KEYS = {
    'noise.max_merge', 'noise.butterworth.temporal_cutoff', 'noise.butterworth.spatial_cutoff',
    'prompt_refine.timeout',
}

# Dataclass fields that errors name, by config key
FIELD_KEYS = {
    'tile_frames': 'noise.tile_frames', 'overlap': 'noise.overlap', 'replication': 'noise.replication',
    'max_merge': 'noise.max_merge', 'blend_mode': 'noise.blend_mode', 'seed': 'noise.seed',
    'butterworth_order': 'noise.butterworth.order', 'temporal_cutoff': 'noise.butterworth.temporal_cutoff',
    'spatial_cutoff': 'noise.butterworth.spatial_cutoff', 'batch': 'latent.batch',
    'channels': 'latent.channels', 'height': 'latent.height', 'width': 'latent.width',
    'embedding_dim': 'condition.embedding_dim', 'max_in_flight': 'sampling.max_in_flight',
    'Step count': 'sampling.steps',
}


def _kind_of(dotted: str, default) -> str:
    if dotted in OPTIONAL_KINDS:
        return OPTIONAL_KINDS[dotted]
    if dotted in FLOAT_KEYS:
        return 'number'
    if isinstance(default, bool):
        return 'boolean'
    if isinstance(default, int):
        return 'integer'
    if isinstance(default, float):
        return 'number'
    return 'string'


def _matches(kind: str, value) -> bool:
    if kind == 'boolean':
        return isinstance(value, bool)
    if kind == 'integer':
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == 'number':
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, str)


def _key_lines(node, prefix: str = '') -> Dict[str, int]:
    """Dotted key -> 1-based line, from a composed YAML node tree"""
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            dotted = f"{prefix}{key_node.value}"
            lines[dotted] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, dotted + '.'))
    return lines


@dataclass
class RunConfig:
    """Resolved run configuration"""
    data: Dict[str, object]
    path: Optional[Path] = None
    lines: Dict[str, int] = field(default_factory=dict)

    def get(self, dotted: str):
        value = self.data
        for part in dotted.split('.'):
            value = value[part]
        return value

    @property
    def seed(self) -> int:
        return self.get('noise.seed')

    @property
    def digest(self) -> str:
        """SHA-256 of the canonical JSON of the resolved config"""
        canonical = json.dumps(self.data, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def _located(self, e: Exception) -> ConfigError:
        message = str(e)
        key = next((dotted for name, dotted in FIELD_KEYS.items() if message.startswith(name)), None)
        return ConfigError(message, key=key, line=self.lines.get(key) if key else None)

    def noise_config(self) -> NoiseInitConfig:
        latent = self.data['latent']
        noise = self.data['noise']
        butterworth = noise['butterworth']
        try:
            return NoiseInitConfig(
                tile_frames=noise['tile_frames'],
                overlap=noise['overlap'],
                replication=noise['replication'],
                batch=latent['batch'],
                channels=latent['channels'],
                height=latent['height'],
                width=latent['width'],
                max_merge=float(noise['max_merge']),
                butterworth_order=butterworth['order'],
                temporal_cutoff=float(butterworth['temporal_cutoff']),
                spatial_cutoff=float(butterworth['spatial_cutoff']),
                blend_mode=noise['blend_mode'],
                seed=noise['seed'],
            )
        except VideoMergeError as e:
            raise self._located(e) from e

    def layout(self) -> TileLayout:
        noise = self.noise_config()
        return TileLayout(noise.tile_frames, noise.overlap, noise.long_frames)

    def generation_config(self) -> GenerationConfig:
        noise = self.noise_config()
        sampling = self.data['sampling']
        condition = self.data['condition']
        try:
            return GenerationConfig(
                layout=TileLayout(noise.tile_frames, noise.overlap, noise.long_frames),
                schedule=build_schedule(sampling['steps']),
                noise=noise,
                condition=ConditionVector.from_prompt(condition['prompt'], condition['embedding_dim']),
                parallel_tiles=sampling['parallel_tiles'],
                max_in_flight=sampling['max_in_flight'],
                long_noise_init=sampling['long_noise_init'],
            )
        except ConfigError:
            raise
        except VideoMergeError as e:
            raise self._located(e) from e


class ConfigLoader:
    """YAML run-config loading, validation and command-line overrides"""

    def __init__(self):
        self.logger = logging.getLogger('ConfigLoader')

    def defaults(self) -> RunConfig:
        return RunConfig(deepcopy(DEFAULTS))

    def load(self,
             path: Optional[Union[str, Path]] = None,
             overrides: Iterable[Tuple[str, object]] = ()
             ) -> RunConfig:
        """
        Load a run config

        Args:
            path: YAML file; defaults only when None
            overrides: (dotted key, value) pairs applied after the file

        Returns:
            RunConfig with every key resolved
        """
        config = self.defaults()
        if path is not None:
            path = Path(path)
            try:
                text = path.read_text(encoding='utf-8')
            except OSError as e:
                raise ConfigError(f"Cannot read config {path}: {e.strerror or str(e)}") from e
            raw, lines = self.parse(text)
            self._merge(config.data, raw, lines)
            config.path = path
            config.lines = lines
            self.logger.info(f"Loaded config {path}")

        for dotted, value in overrides:
            self.apply_override(config, dotted, value)
        return config

    def parse(self, text: str) -> Tuple[Dict[str, object], Dict[str, int]]:
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
            raw = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            line = mark.line + 1 if mark is not None else None
            problem = getattr(e, 'problem', None) or str(e)
            raise ConfigError(f"YAML syntax error: {problem}", line=line) from e

        lines = _key_lines(node)
        if not isinstance(raw, dict):
            raise ConfigError("Config must be a mapping with a schema_version key")
        if 'schema_version' not in raw:
            raise ConfigError("Missing schema_version", key='schema_version')
        if raw['schema_version'] != SCHEMA_VERSION:
            raise ConfigError(
                f"Unsupported schema version {raw['schema_version']!r}, expected {SCHEMA_VERSION}",
                key='schema_version', line=lines.get('schema_version')
            )
        return raw, lines

    def _merge(self, target: Dict, raw: Dict, lines: Dict[str, int], prefix: str = '') -> None:
        for key, value in raw.items():
            dotted = f"{prefix}{key}"
            if not isinstance(key, str) or key not in target:
                raise ConfigError("Unknown key", key=dotted, line=lines.get(dotted))
            default = target[key]
            if isinstance(default, dict):
                if not isinstance(value, dict):
                    raise ConfigError("Expected a mapping", key=dotted, line=lines.get(dotted))
                self._merge(default, value, lines, dotted + '.')
                continue
            target[key] = self._checked(dotted, default, value, lines.get(dotted))

    def _checked(self, dotted: str, default, value, line: Optional[int]):
        if value is None and dotted in OPTIONAL_KINDS:
            return None
        kind = _kind_of(dotted, default)
        if kind == 'number' and isinstance(value, str):
            # YAML 1.1 reads exponent floats without a dot as strings
            try:
                value = float(value)
            except ValueError:
                pass
        if not _matches(kind, value):
            raise ConfigError(f"Expected {kind}, got {value!r}", key=dotted, line=line)
        return float(value) if kind == 'number' else value

    def apply_override(self, config: RunConfig, dotted: str, value) -> None:
        """Set one dotted key; string values of non-string keys are parsed as YAML scalars"""
        parts = dotted.split('.')
        target = config.data
        for part in parts[:-1]:
            if part not in target or not isinstance(target[part], dict):
                raise ConfigError("Unknown key", key=dotted)
            target = target[part]
        leaf = parts[-1]
        if leaf not in target or isinstance(target[leaf], dict) or dotted == 'schema_version':
            raise ConfigError("Unknown key", key=dotted)

        if isinstance(value, str) and _kind_of(dotted, target[leaf]) != 'string':
            try:
                value = yaml.safe_load(value)
            except yaml.YAMLError as e:
                raise ConfigError(f"Cannot parse value {value!r}", key=dotted) from e
        target[leaf] = self._checked(dotted, target[leaf], value, None)
        self.logger.debug(f"Override {dotted} = {value!r}")


def parse_assignment(text: str) -> Tuple[str, str]:
    """'section.key=value' -> (dotted key, raw value)"""
    if '=' not in text:
        raise ConfigError(f"Override must look like section.key=value, got {text!r}")
    key, value = text.split('=', 1)
    return key.strip(), value.strip()
