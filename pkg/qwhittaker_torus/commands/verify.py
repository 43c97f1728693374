import logging
from pathlib import Path
from typing import Optional

import click

from ..config import get_config
from ..dimers import relative_height
from ..enumeration import enumerate_sector
from ..errors import ParameterError, PathError
from ..gibbs import Representation, measure_table
from ..utils.rng import SeededRNG
from ..utils.scalars import format_scalar, parse_scalar_list
from ..verification import (
    IDENTITY_QS,
    check_balance,
    check_ergodicity,
    check_identity,
    check_s_identity,
    check_stationarity,
    connect,
    replay_is_valid,
)
from .common import (
    EXIT_FAILED,
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


def _states(config: RunConfig):
    s = config.sector
    return enumerate_sector(s.L, s.N, s.m1, s.m2, cap=config.cap, progress=config.progress)


def _arithmetic(config: RunConfig):
    if config.mode is Representation.RATIONAL:
        return config.params
    return config.params.as_float()


@click.group()
def verify():
    """Machine checks of the stationarity proof and of ergodicity."""
    pass


# --- stationarity ---

@guarded
def execute_stationarity(config: RunConfig) -> int:
    states = _states(config)
    perturb = config.options.get('perturb_weight')
    if perturb is not None and not 0 <= perturb < len(states):
        raise ParameterError(f"--perturb-weight must index one of the {len(states)} states, got {perturb}.")
    measure = None
    measure_csv = config.outputs.get('measure_csv')
    if measure_csv:
        measure = measure_table(states, config.params, config.mode, progress=config.progress)
        measure.to_csv(measure_csv)
    result = check_stationarity(
        config.sector, config.params, config.mode, states=states, perturb=perturb,
        tolerance=config.tolerance, threads=config.threads, measure=measure,
    )
    emit(config, result.to_dict())
    return EXIT_OK if result.passed else EXIT_FAILED


@verify.command()
@sector_options()
@gibbs_options
@click.option('--perturb-weight', type=int, default=None, metavar='INDEX',
              help='Double the weight of state INDEX first (negative control; expected to fail).')
@click.option('--measure-csv', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Also write the measure table as CSV.')
@max_states_option
@click.pass_context
def stationarity(ctx, L, N, m1, m2, q, a, mode, perturb_weight, measure_csv, max_states):
    """Check pi . L = 0 on every state of a sector."""
    sector = build_sector(L, N, m1, m2)
    params, representation = build_params(q, a, N, mode)
    config = base_config(
        ctx, "verify stationarity", sector=sector, L=L, N=N, m1=m1, params=params, mode=representation,
        max_states=max_states, outputs={'measure_csv': measure_csv}, options={'perturb_weight': perturb_weight},
    )
    return dispatch(ctx, config, execute_stationarity)


# --- identity ---

@guarded
def execute_identity(config: RunConfig) -> int:
    qs = config.options.get('qs') or IDENTITY_QS
    result = check_identity(samples=config.samples, seed=config.seed, qs=qs, tolerance=config.tolerance)
    payload = {'frames': result.to_dict()}
    passed = result.passed
    if config.sector is not None:
        sums = check_s_identity(_states(config), _arithmetic(config), config.tolerance)
        payload['sector_sums'] = sums.to_dict()
        passed = passed and sums.passed
    payload['passed'] = passed
    emit(config, payload)
    return EXIT_OK if passed else EXIT_FAILED


@verify.command()
@click.option('--samples', type=int, default=None, help='Random frames to test (default from config).')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--qs', default=None, help='Comma separated q values for the frames (default 1/7,1/3,1/2,9/10).')
@click.option('--L', 'L', type=int, default=None, help='With --N --m1 --m2 --q --a, also check S1 = S2 on a sector.')
@click.option('--N', 'N', type=int, default=None)
@click.option('--m1', type=int, default=None)
@click.option('--m2', type=int, default=None)
@click.option('--q', 'q', default=None)
@click.option('--a', 'a', default=None)
@click.option('--mode', type=click.Choice(['rational', 'float', 'log']), default=None)
@max_states_option
@click.pass_context
def identity(ctx, samples, seed, qs, L, N, m1, m2, q, a, mode, max_states):
    """Check the cancellations behind S1 = S2, and S1 = S2 itself on a sector."""
    if samples is None:
        samples = int(get_config().get('identity_samples', 10_000))
    if samples < 1:
        raise click.BadParameter("must be at least 1.", param_hint="'--samples'")
    q_values = None
    if qs:
        try:
            q_values = tuple(parse_scalar_list(qs))
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="'--qs'")
    sector = params = representation = None
    sector_flags = (L, N, m1, m2, q, a)
    if any(v is not None for v in sector_flags):
        if any(v is None for v in sector_flags):
            raise click.UsageError("Checking S1 = S2 on a sector needs all of --L --N --m1 --m2 --q --a.")
        sector = build_sector(L, N, m1, m2)
        params, representation = build_params(q, a, N, mode)
    config = base_config(
        ctx, "verify identity", sector=sector, L=L, N=N, m1=m1, params=params, mode=representation,
        seed=seed, samples=samples, max_states=max_states, options={'qs': q_values},
    )
    return dispatch(ctx, config, execute_identity)


# --- balance ---

@guarded
def execute_balance(config: RunConfig) -> int:
    params = _arithmetic(config)
    pairs = with_predecessor = 0
    failures = []
    for state in _states(config):
        for p in state.labels():
            result = check_balance(state, p, params, allow_missing=True, tolerance=config.tolerance)
            pairs += 1
            if result.lhs != 0:
                with_predecessor += 1
            if not result.equal:
                failures.append({
                    'configuration': state.to_dict(), 'particle': list(p),
                    'lhs': format_scalar(result.lhs), 'rhs': format_scalar(result.rhs),
                })
    passed = not failures
    emit(config, {
        'pairs': pairs,
        'pairs_with_predecessor': with_predecessor,
        'passed': passed,
        'counterexamples': failures[:5],
    })
    return EXIT_OK if passed else EXIT_FAILED


@verify.command()
@sector_options()
@gibbs_options
@max_states_option
@click.pass_context
def balance(ctx, L, N, m1, m2, q, a, mode, max_states):
    """Check the per-move balance relation for every state and particle."""
    sector = build_sector(L, N, m1, m2)
    params, representation = build_params(q, a, N, mode)
    config = base_config(
        ctx, "verify balance", sector=sector, L=L, N=N, m1=m1, params=params, mode=representation,
        max_states=max_states,
    )
    return dispatch(ctx, config, execute_balance)


# --- ergodicity ---

@guarded
def execute_ergodicity(config: RunConfig) -> int:
    states = _states(config)
    connected = check_ergodicity(config.sector, config.params, states=states, threads=config.threads)
    payload = {'states': len(states), 'strongly_connected': connected}
    passed = connected
    pairs = config.options.get('pairs') or 0
    if pairs and states:
        rng = SeededRNG(config.seed)
        checked = 0
        failures = []
        for _ in range(pairs):
            eta, eta2 = rng.choice(states), rng.choice(states)
            expected = sum(relative_height(eta, eta2).values())
            try:
                moves = connect(eta, eta2, rng=rng)
            except PathError as e:
                failures.append({'from': eta.occupation_hex, 'to': eta2.occupation_hex, 'error': str(e)})
                continue
            checked += 1
            if len(moves) != expected or not replay_is_valid(eta, moves):
                failures.append({'from': eta.occupation_hex, 'to': eta2.occupation_hex, 'moves': len(moves)})
        payload['connections'] = {'pairs': pairs, 'checked': checked, 'failures': failures[:5]}
        passed = passed and not failures
    payload['passed'] = passed
    emit(config, payload)
    return EXIT_OK if passed else EXIT_FAILED


@verify.command()
@sector_options()
@gibbs_options
@click.option('--pairs', type=int, default=0, show_default=True,
              help='Also connect this many random state pairs by single-particle moves.')
@click.option('--seed', type=int, default=0, show_default=True)
@max_states_option
@click.pass_context
def ergodicity(ctx, L, N, m1, m2, q, a, mode, pairs, seed, max_states: Optional[int]):
    """Check that positive-rate moves connect every pair of states."""
    sector = build_sector(L, N, m1, m2)
    params, representation = build_params(q, a, N, mode)
    config = base_config(
        ctx, "verify ergodicity", sector=sector, L=L, N=N, m1=m1, params=params, mode=representation,
        seed=seed, max_states=max_states, options={'pairs': pairs},
    )
    return dispatch(ctx, config, execute_ergodicity)
