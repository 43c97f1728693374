import logging
from pathlib import Path

import click

from ..dynamics import simulate as run_chain
from ..enumeration import enumerate_sector
from ..gibbs import Representation, measure_table
from ..lattice import canonical_configuration, validate
from ..utils.serialization import read_configuration
from ..verification import total_variation
from .common import (
    EXIT_OK,
    RunConfig,
    base_config,
    build_params,
    build_sector,
    dispatch,
    emit,
    gibbs_options,
    guarded,
    max_states_option,
    sector_options,
)

logger = logging.getLogger(__name__)


def _initial(config: RunConfig):
    init = config.outputs.get('init')
    if init is None:
        return canonical_configuration(config.sector)
    start = read_configuration(init)
    if (start.L, start.N) != (config.sector.L, config.sector.N):
        raise click.UsageError(
            f"{init} holds an L={start.L}, N={start.N} configuration; "
            f"expected L={config.sector.L}, N={config.sector.N}."
        )
    if not validate(start):
        raise click.UsageError(f"{init} does not hold a valid configuration.")
    if start.sector != config.sector:
        raise click.UsageError(f"{init} lies in {start.sector}, not in {config.sector}.")
    return start


@guarded
def execute(config: RunConfig) -> int:
    """Runs the chain and prints the occupation summary."""
    start = _initial(config)
    options = config.options
    trajectory = run_chain(
        start, config.params, config.t_max, config.seed,
        record_events=config.outputs.get('events') is not None,
        track_states=options.get('track_states', True),
        max_events=options.get('max_events'),
        check_invariants=options.get('check_invariants', False),
    )
    events = config.outputs.get('events')
    if events is not None:
        trajectory.write_events(events)

    payload = trajectory.summary()
    payload['initial'] = start.to_dict()
    if options.get('track_states', True):
        payload['occupation_times'] = dict(sorted(trajectory.occupation_times.items()))
    if options.get('compare'):
        s = config.sector
        states = enumerate_sector(s.L, s.N, s.m1, s.m2, cap=config.cap, progress=config.progress)
        exact = measure_table(states, config.params.as_float(), Representation.FLOAT)
        reference = {state.occupation_hex: float(p) for state, p in zip(exact.states, exact.probabilities)}
        payload['total_variation'] = total_variation(trajectory.occupation_distribution(), reference)
        payload['states_visited'] = len(trajectory.occupation_times)
        payload['states_total'] = len(states)
    emit(config, payload)
    return EXIT_OK


@click.command()
@sector_options()
@gibbs_options
@click.option('--t-max', type=float, required=True, help='Simulated time horizon.')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed of the PCG64 generator.')
@click.option('--init', type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help='Initial configuration as JSON (rows or occupation form); default is a canonical state.')
@click.option('--events', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Write the event log (time, root_row, root_col, family_size) as CSV.')
@click.option('--max-events', type=int, default=None, help='Stop after this many events.')
@click.option('--compare', is_flag=True,
              help='Enumerate the sector and report the total-variation distance to the Gibbs measure.')
@click.option('--no-occupation', is_flag=True,
              help='Skip per-state occupation times (for tori too large to track).')
@click.option('--check-invariants', is_flag=True, help='Validate every visited configuration.')
@max_states_option
@click.pass_context
def simulate(ctx, L, N, m1, m2, q, a, mode, t_max, seed, init, events, max_events, compare,
             no_occupation, check_invariants, max_states):
    """Run the continuous-time family dynamics from a configuration."""
    sector = build_sector(L, N, m1, m2)
    params, representation = build_params(q, a, N, mode)
    if not t_max > 0:
        raise click.BadParameter("must be positive.", param_hint="'--t-max'")
    if max_events is not None and max_events < 1:
        raise click.BadParameter("must be at least 1.", param_hint="'--max-events'")
    if compare and no_occupation:
        raise click.UsageError("--compare needs occupation times; drop --no-occupation.")
    config = base_config(
        ctx, "simulate", sector=sector, L=L, N=N, m1=m1, params=params, mode=representation,
        seed=seed, t_max=t_max, max_states=max_states,
        outputs={'init': init, 'events': events},
        options={
            'max_events': max_events,
            'compare': compare,
            'track_states': not no_occupation,
            'check_invariants': check_invariants,
        },
    )
    return dispatch(ctx, config, execute)
