"""Subcommand implementations; each returns its result so it can be called directly."""
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple
import json
import logging
import sys
import argparse
import pandas as pd
import yaml

from .. import __version__
from ..analysis.denoisers import ORACLE_NAMES, reference_denoisers
from ..analysis.latent_fusion import LatentFusion
from ..analysis.metrics_calculator import MetricsCalculator
from ..analysis.tiled_sampler import generate, initial_latent
from ..core.frequency_filter import butterworth_mask
from ..models.configs import ConditionVector, GenerationConfig, TileLayout
from ..models.prompt import Category, RefinedPrompt
from ..models.run_manifest import RunManifest
from ..prompting.prompt_refiner import PromptRefiner
from ..prompting.refiner_clients import RemoteRefinerClient, stub_client
from ..storage.config_loader import ConfigLoader, RunConfig, parse_assignment
from ..storage.latent_file import load_latent, read_latent, write_latent
from ..utils.error_handler import ConfigError, InvalidInputError, InvalidShapeError
from ..utils.memory_monitor import MemoryMonitor
from ..visualization.weight_profile import WeightProfilePlot

logger = logging.getLogger('Commands')

Overrides = Iterable[Tuple[str, object]]


def load_run_config(config_path: Optional[str], overrides: Overrides = ()) -> RunConfig:
    return ConfigLoader().load(config_path, overrides)


def _report(config: RunConfig, video, source: str, tau: Optional[float] = None,
            reference=None) -> Dict[str, object]:
    """Metric report of a generated or loaded latent, using the config's mask and layout"""
    noise = config.noise_config()
    layout = config.layout() if video.shape[2] == noise.long_frames else None
    mask = butterworth_mask(noise.tile_frames, video.shape[3], video.shape[4],
                            order=noise.butterworth_order,
                            temporal_cutoff=noise.temporal_cutoff,
                            spatial_cutoff=noise.spatial_cutoff)
    if layout is None:
        logger.warning(f"{source}: frame count does not match the config layout; low-frequency similarity skipped")
    report = MetricsCalculator().build_report(
        video, tau=tau, reference=reference, layout=layout, mask=mask,
        seed=config.seed, config_digest=config.digest, source=source
    )
    return report.to_dict()


def cmd_init_noise(config_path: Optional[str],
                   output: str,
                   overrides: Overrides = (),
                   stream: TextIO = sys.stdout
                   ) -> Dict[str, object]:
    """Write the initial long noise; prints shape and checksum"""
    config = load_run_config(config_path, overrides)
    generation = config.generation_config()
    monitor = MemoryMonitor()

    with monitor.track('init'):
        latent = initial_latent(generation)
    with monitor.track('write'):
        checksum = write_latent(output, latent)

    manifest = RunManifest(
        command='init-noise', config_digest=config.digest, config=config.data,
        seed=config.seed, tool_version=__version__,
        output_checksums={Path(output).name: checksum}, **monitor.summary()
    )
    manifest_path = manifest.write(RunManifest.path_for(output))

    stream.write(f"shape={list(latent.shape)} checksum={checksum}\n")
    return {'shape': latent.shape, 'checksum': checksum, 'manifest': str(manifest_path)}


def _refined_condition(config: RunConfig) -> Tuple[Optional[RefinedPrompt], Optional[ConditionVector]]:
    settings = config.data['prompt_refine']
    prompt = config.get('condition.prompt')
    if not settings['enabled'] or not prompt:
        return None, None
    refined = cmd_refine_prompt(prompt, settings['category'], timeout=settings['timeout'],
                                model=settings['model'], max_output_tokens=settings['max_output_tokens'],
                                stream=None)
    return refined, ConditionVector.from_prompt(refined.refined, config.get('condition.embedding_dim'))


def cmd_generate(config_path: Optional[str],
                 output: str,
                 denoiser: str = 'zero',
                 target: Optional[str] = None,
                 amplitude: float = 0.5,
                 overrides: Overrides = (),
                 show_progress: bool = False,
                 stream: TextIO = sys.stdout
                 ) -> Dict[str, object]:
    """Full tiled generation; writes the latent and its manifest"""
    config = load_run_config(config_path, overrides)
    generation = config.generation_config()
    noise = generation.noise
    monitor = MemoryMonitor()

    target_latent = None
    run_inputs: Dict[str, object] = {'denoiser': denoiser, 'amplitude': amplitude}
    if denoiser in ORACLE_NAMES:
        if target is None:
            raise ConfigError(f"The {denoiser} denoiser needs a target latent file", key='target')
        target_latent, target_checksum = load_latent(target)
        if target_latent.shape != noise.long_shape:
            raise InvalidShapeError(
                f"Target shape {target_latent.shape} differs from the configured long shape {noise.long_shape}"
            )
        run_inputs.update(target=str(target), target_checksum=target_checksum)
    denoisers = reference_denoisers(target_latent, amplitude, seed=noise.seed,
                                    order=noise.butterworth_order,
                                    temporal_cutoff=noise.temporal_cutoff,
                                    spatial_cutoff=noise.spatial_cutoff)

    refined, condition = _refined_condition(config)
    if condition is not None:
        generation = GenerationConfig(
            layout=generation.layout, schedule=generation.schedule, noise=noise, condition=condition,
            parallel_tiles=generation.parallel_tiles, max_in_flight=generation.max_in_flight,
            long_noise_init=generation.long_noise_init
        )

    with monitor.track('init'):
        x_init = initial_latent(generation)
    with monitor.track('sample'):
        latent = generate(generation, denoisers[denoiser], show_progress=show_progress, x_init=x_init)
    with monitor.track('write'):
        checksum = write_latent(output, latent)
    with monitor.track('metrics'):
        metrics = _report(config, latent, Path(output).name, tau=config.get('metrics.tau'))

    manifest = RunManifest(
        command='generate', config_digest=config.digest,
        config={**config.data, **run_inputs},
        seed=config.seed, tool_version=__version__, metrics=metrics,
        output_checksums={Path(output).name: checksum},
        refined_prompt=refined.to_dict() if refined else None,
        **monitor.summary()
    )
    manifest_path = manifest.write(RunManifest.path_for(output))

    stream.write(f"shape={list(latent.shape)} checksum={checksum} manifest={manifest_path}\n")
    return {'shape': latent.shape, 'checksum': checksum, 'manifest': str(manifest_path)}


def cmd_metrics(inputs: Sequence[str],
                config_path: Optional[str] = None,
                diff: bool = False,
                reference: Optional[str] = None,
                tau: Optional[float] = None,
                report: Optional[str] = None,
                overrides: Overrides = (),
                stream: TextIO = sys.stdout
                ) -> Dict[str, object]:
    """Metric reports of latent files as one JSON document, or the max abs difference in diff mode"""
    calculator = MetricsCalculator()
    if diff:
        if len(inputs) != 2:
            raise InvalidInputError(f"Diff mode takes exactly two files, got {len(inputs)}")
        result: Dict[str, object] = {
            'max_abs_diff': calculator.max_abs_difference(read_latent(inputs[0]), read_latent(inputs[1]))
        }
    else:
        config = load_run_config(config_path, overrides)
        tau = tau if tau is not None else config.get('metrics.tau')
        reference = reference or config.get('metrics.reference')
        reference_latent = read_latent(reference) if reference else None
        result = {'reports': {
            path: _report(config, read_latent(path), Path(path).name, tau=tau, reference=reference_latent)
            for path in inputs
        }}

    document = json.dumps(result, indent=2, sort_keys=True)
    if report:
        Path(report).write_text(document + '\n', encoding='utf-8')
    stream.write(document + '\n')
    return result


def cmd_weights(tile_length: int,
                overlap: int,
                long_length: int,
                output: Optional[str] = None,
                plot: Optional[str] = None,
                stream: TextIO = sys.stdout
                ) -> pd.DataFrame:
    """Per-frame covering tiles and normalized weights as CSV"""
    layout = TileLayout(tile_length, overlap, long_length)
    fusion = LatentFusion()
    weights = fusion.weight_frame(layout)

    rows = []
    for frame, group in weights.groupby('frame', sort=True):
        rows.append({
            'frame': int(frame),
            'tiles': ' '.join(str(int(i)) for i in group['tile']),
            'weights': ' '.join(repr(float(w)) for w in group['weight']),
            'weight_sum': float(group['weight'].sum()),
        })
    table = pd.DataFrame(rows, columns=['frame', 'tiles', 'weights', 'weight_sum'])

    if output:
        table.to_csv(output, index=False)
    else:
        table.to_csv(stream, index=False)
    if plot:
        plotter = WeightProfilePlot()
        plotter.save_figure(plotter.generate_figure(layout, weights), plot)
    return table


def load_fixtures(path: str) -> Dict[str, str]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding='utf-8')) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Cannot load fixtures {path}: {str(e)}") from e
    if not isinstance(data, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in data.items()):
        raise ConfigError(f"Fixtures {path} must map prompt strings to response strings")
    return data


def cmd_refine_prompt(prompt: str,
                      category: str = Category.HUMAN.value,
                      fixtures: Optional[str] = None,
                      timeout: float = 30.0,
                      model: Optional[str] = None,
                      max_output_tokens: Optional[int] = None,
                      stream: Optional[TextIO] = sys.stdout
                      ) -> RefinedPrompt:
    """Refine with the remote client when VIDEOMERGE_LLM_ENDPOINT is set, else the stub"""
    options = {'timeout': timeout}
    if model:
        options['model'] = model
    if max_output_tokens:
        options['max_output_tokens'] = max_output_tokens
    client = RemoteRefinerClient.from_env(**options)
    if client is None:
        client = stub_client(load_fixtures(fixtures) if fixtures else None)

    refined = PromptRefiner().refine(prompt, Category(category), client)
    if stream is not None:
        stream.write(json.dumps(refined.to_dict(), indent=2, sort_keys=True) + '\n')
    return refined


def config_overrides(args: argparse.Namespace) -> List[Tuple[str, object]]:
    """Dedicated flags first, then --set assignments in order"""
    overrides: List[Tuple[str, object]] = []
    if getattr(args, 'seed', None) is not None:
        overrides.append(('noise.seed', args.seed))
    if getattr(args, 'steps', None) is not None:
        overrides.append(('sampling.steps', args.steps))
    if getattr(args, 'parallel_tiles', None) is not None:
        if args.parallel_tiles < 1:
            raise ConfigError("--parallel-tiles must be at least 1", key='sampling.max_in_flight')
        overrides.append(('sampling.parallel_tiles', args.parallel_tiles > 1))
        overrides.append(('sampling.max_in_flight', args.parallel_tiles))
    overrides.extend(parse_assignment(text) for text in getattr(args, 'overrides', []))
    return overrides


def run_command(args: argparse.Namespace, stream: TextIO = sys.stdout):
    """Dispatch parsed arguments to their cmd_* function"""
    if args.command == 'init-noise':
        return cmd_init_noise(args.config, args.output, config_overrides(args), stream=stream)
    if args.command == 'generate':
        return cmd_generate(args.config, args.output, denoiser=args.denoiser, target=args.target,
                            amplitude=args.amplitude, overrides=config_overrides(args),
                            show_progress=args.progress, stream=stream)
    if args.command == 'metrics':
        return cmd_metrics(args.inputs, args.config, diff=args.diff, reference=args.reference,
                           tau=args.tau, report=args.report, overrides=config_overrides(args), stream=stream)
    if args.command == 'weights':
        return cmd_weights(args.tile_length, args.overlap, args.long_length,
                           output=args.output, plot=args.plot, stream=stream)
    if args.command == 'refine-prompt':
        return cmd_refine_prompt(args.prompt, args.category, fixtures=args.fixtures,
                                 timeout=args.timeout, stream=stream)
    raise InvalidInputError(f"Unknown command {args.command}")
