import logging
import platform
from fractions import Fraction

import click

from .. import SCHEMA_VERSION, __version__
from .. import config as settings
from ..config import get_config
from ..enumeration import candidate_bound
from ..lattice import canonical_configuration
from .common import EXIT_OK, RunConfig, base_config, build_sector, check_torus, dispatch, emit, guarded

logger = logging.getLogger(__name__)


def admissible_m2(L: int, N: int, m1: int):
    """Sector indices m2 with 1 <= m2 < N and m1/L + m2/N < 1."""
    return [m2 for m2 in range(1, N) if Fraction(m1, L) + Fraction(m2, N) < 1]


@guarded
def execute(config: RunConfig) -> int:
    """Prints version, resolved settings and, when given, a torus or sector summary."""
    cap = config.cap
    payload = {
        'package': {'version': __version__, 'schema': SCHEMA_VERSION, 'python': platform.python_version()},
        'settings': {
            'config_file': str(settings.CONFIG_FILE),
            'stored': get_config(),
            'effective_enumeration_cap': cap,
            'float_tolerance': config.tolerance,
            'threads': config.threads,
        },
    }
    if config.L is not None:
        bound = candidate_bound(config.L, config.N, config.m1)
        payload['torus'] = {
            'candidate_bound': bound,
            'enumerable': bound <= cap,
            'admissible_m2': admissible_m2(config.L, config.N, config.m1),
        }
    if config.sector is not None:
        payload['sector_summary'] = {
            **config.sector.to_dict(),
            'n3': config.sector.n3,
            'canonical_configuration': canonical_configuration(config.sector).to_dict(),
        }
    emit(config, payload)
    return EXIT_OK


@click.command()
@click.option('--L', 'L', type=int, default=None, help='Describe this torus (needs --N and --m1).')
@click.option('--N', 'N', type=int, default=None)
@click.option('--m1', type=int, default=None)
@click.option('--m2', type=int, default=None, help='Also describe this sector.')
@click.option('--max-states', type=int, default=None, help='Cap to judge enumerability against.')
@click.pass_context
def info(ctx, L, N, m1, m2, max_states):
    """Show the version, resolved configuration and an optional sector summary."""
    sector = None
    if any(v is not None for v in (L, N, m1, m2)):
        if any(v is None for v in (L, N, m1)):
            raise click.UsageError("Describing a torus needs all of --L --N --m1.")
        check_torus(L, N, m1)
        if m2 is not None:
            sector = build_sector(L, N, m1, m2)
    config = base_config(ctx, "info", sector=sector, L=L, N=N, m1=m1, max_states=max_states)
    return dispatch(ctx, config, execute)
