import argparse

from .. import __version__
from ..analysis.denoisers import DENOISER_NAMES
from ..models.prompt import Category


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help='YAML run config (schema_version: 1)')
    parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help='Override a config key; repeatable')
    parser.add_argument('--seed', type=int, help='Override noise.seed')
    parser.add_argument('--steps', type=int, help='Override sampling.steps')
    parser.add_argument('--parallel-tiles', type=int, metavar='N',
                        help='Evaluate up to N tiles concurrently (N = 1 is sequential)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='videomerge',
        description='Tiled long-video latent generation with fused overlapping tiles'
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--log-level', default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Logging level (stderr)')
    subparsers = parser.add_subparsers(dest='command', required=True)

    init_noise = subparsers.add_parser('init-noise', help='Write the initial long noise latent')
    _add_config_options(init_noise)
    init_noise.add_argument('output', help='Output VMLT file')

    generate = subparsers.add_parser('generate', help='Run tiled generation with a reference denoiser')
    _add_config_options(generate)
    generate.add_argument('output', help='Output VMLT file')
    generate.add_argument('--denoiser', choices=DENOISER_NAMES, default='zero')
    generate.add_argument('--target', help='Target latent file for the oracle denoisers')
    generate.add_argument('--amplitude', type=float, default=0.5, help='Perturbed oracle amplitude')
    generate.add_argument('--progress', action='store_true', help='Show a progress bar')

    metrics = subparsers.add_parser('metrics', help='Compute metrics of latent files')
    _add_config_options(metrics)
    metrics.add_argument('inputs', nargs='+', help='VMLT files')
    metrics.add_argument('--diff', action='store_true', help='Max absolute difference of exactly two files')
    metrics.add_argument('--reference', help='Reference VMLT file for the Frechet distance')
    metrics.add_argument('--tau', type=float, help='Identity consistency tolerance (overrides metrics.tau)')
    metrics.add_argument('--report', help='Also write the JSON report to this file')

    weights = subparsers.add_parser('weights', help='Print the per-frame fusion weight table as CSV')
    weights.add_argument('tile_length', type=int, metavar='N')
    weights.add_argument('overlap', type=int, metavar='O')
    weights.add_argument('long_length', type=int, metavar='L')
    weights.add_argument('--output', help='Write the CSV to a file instead of stdout')
    weights.add_argument('--plot', help='Save the weight profile figure (PNG)')

    refine = subparsers.add_parser('refine-prompt', help='Refine a prompt with a language model')
    refine.add_argument('prompt')
    refine.add_argument('--category', choices=[c.value for c in Category], default=Category.HUMAN.value)
    refine.add_argument('--fixtures', help='YAML prompt -> response table for the offline stub')
    refine.add_argument('--timeout', type=float, default=30.0, help='Remote client timeout in seconds')

    return parser
