import sys
import logging
from pathlib import Path

import click

from ..enumeration import enumerate_all
from ..utils.serialization import write_configurations, write_json_lines
from .common import (
    EXIT_OK,
    RunConfig,
    base_config,
    build_sector,
    check_torus,
    dispatch,
    emit,
    guarded,
    max_states_option,
)

logger = logging.getLogger(__name__)


@guarded
def execute(config: RunConfig) -> int:
    """Enumerates the torus and prints configurations or sector sizes."""
    census = enumerate_all(config.L, config.N, config.m1, cap=config.cap, progress=config.progress)
    m2 = config.sector.m2 if config.sector is not None else None
    if m2 is not None:
        slices = {m2: census.states(m2)}
    else:
        slices = dict(sorted(census.sectors.items()))

    output = config.outputs.get('output')
    if config.options.get('count_only') or output:
        if output:
            for key, states in slices.items():
                target = output if len(slices) == 1 else output.with_name(f"{output.stem}_m2_{key}{output.suffix}")
                write_configurations(states, target, m2=key)
        emit(config, {
            'sizes': {str(key): len(states) for key, states in slices.items()},
            'rejected': census.rejected,
            'output': str(output) if output else None,
        })
        return EXIT_OK

    def records():
        for key, states in slices.items():
            for state in states:
                record = state.to_dict()
                record['occupation'] = state.occupation_hex
                record['m2'] = key
                yield record

    count = write_json_lines(records(), sys.stdout)
    logger.info(f"Printed {count} configurations")
    return EXIT_OK


@click.command(name="enumerate")
@click.option('--L', 'L', type=int, required=True, help='Sites per row (horizontal period).')
@click.option('--N', 'N', type=int, required=True, help='Number of rows (vertical period).')
@click.option('--m1', type=int, required=True, help='Particles per row (1 < m1 < L).')
@click.option('--m2', type=int, default=None, help='Restrict the output to one sector.')
@click.option('--count-only', is_flag=True, help='Print sector sizes instead of configurations.')
@click.option('--output', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Write JSON lines here (one file per sector when --m2 is omitted).')
@max_states_option
@click.pass_context
def enumerate_cmd(ctx, L, N, m1, m2, count_only, output, max_states):
    """List every valid configuration of an L x N torus, split by sector."""
    check_torus(L, N, m1)
    sector = build_sector(L, N, m1, m2) if m2 is not None else None
    config = base_config(
        ctx, "enumerate", sector=sector, L=L, N=N, m1=m1, max_states=max_states,
        outputs={'output': output}, options={'count_only': count_only},
    )
    return dispatch(ctx, config, execute)
