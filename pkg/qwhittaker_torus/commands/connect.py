import logging
from pathlib import Path

import click

from ..dimers import relative_height
from ..lattice import validate
from ..utils.rng import SeededRNG
from ..utils.serialization import read_configuration
from ..verification import connect as connect_states
from ..verification import replay_is_valid
from .common import EXIT_FAILED, EXIT_OK, RunConfig, base_config, dispatch, emit, guarded

logger = logging.getLogger(__name__)


def _load(path: Path):
    config = read_configuration(path)
    if not validate(config):
        raise click.BadParameter(f"{path} does not hold a valid configuration.")
    return config


@guarded
def execute(config: RunConfig) -> int:
    """Prints the move sequence from the source to the target configuration."""
    source = _load(config.outputs['source'])
    target = _load(config.outputs['target'])
    if (source.L, source.N) != (target.L, target.N):
        raise click.UsageError(f"Source is {source.L}x{source.N} but target is {target.L}x{target.N}.")
    rng = SeededRNG(config.seed) if config.options.get('randomise') else None
    # SectorError here surfaces as a usage error.
    heights = relative_height(source, target)
    moves = connect_states(source, target, rng=rng)
    valid = replay_is_valid(source, moves)
    passed = valid and len(moves) == sum(heights.values())
    emit(config, {
        'sector': source.sector.to_dict(),
        'from': source.to_dict(),
        'to': target.to_dict(),
        'summed_height': sum(heights.values()),
        'moves': [{'row': m.row, 'x': m.x} for m in moves],
        'replay_valid': valid,
        'passed': passed,
    })
    return EXIT_OK if passed else EXIT_FAILED


@click.command()
@click.argument('source', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument('target', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--seed', type=int, default=None,
              help='Pick the starting face of each round at random with this seed (default: first in row order).')
@click.pass_context
def connect(ctx, source, target, seed):
    """Move SOURCE to TARGET one particle step at a time (both JSON configuration files)."""
    config = base_config(
        ctx, "connect", seed=seed if seed is not None else 0,
        outputs={'source': source, 'target': target}, options={'randomise': seed is not None},
    )
    return dispatch(ctx, config, execute)
