"""Shared option parsing for the sub-commands: sectors, Gibbs parameters and the run record."""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import click

from ..config import get_config, get_enumeration_cap, get_float_tolerance
from ..errors import EnumerationLimitError, ParameterError, SectorError, StructuralError, TorusError
from ..gibbs import GibbsParams, Representation
from ..lattice import Sector
from ..utils.scalars import parse_scalar, parse_scalar_list
from ..utils.serialization import dumps, report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class ResourceLimitError(click.ClickException):
    """Enumeration refused because of the configured cap."""
    exit_code = EXIT_USAGE


@dataclass
class RunConfig:
    """Everything a sub-command needs, validated before any work starts."""
    command: str
    sector: Optional[Sector] = None
    L: Optional[int] = None
    N: Optional[int] = None
    m1: Optional[int] = None
    params: Optional[GibbsParams] = None
    mode: Optional[Representation] = None
    seed: int = 0
    t_max: Optional[float] = None
    samples: Optional[int] = None
    max_states: Optional[int] = None
    threads: int = 1
    progress: bool = False
    tolerance: float = 1e-12
    outputs: Dict[str, Optional[Path]] = field(default_factory=dict)
    options: Dict[str, Any] = field(default_factory=dict)

    @property
    def cap(self) -> int:
        return get_enumeration_cap(self.max_states)

    def provenance(self) -> Dict:
        """Parameter block embedded in every report."""
        data = {'command': self.command, 'seed': self.seed}
        if self.sector is not None:
            data['sector'] = self.sector.to_dict()
        elif self.L is not None:
            data['torus'] = {'L': self.L, 'N': self.N, 'm1': self.m1}
        if self.params is not None:
            data['params'] = self.params.to_dict()
        if self.mode is not None:
            data['mode'] = self.mode.value
        if self.t_max is not None:
            data['t_max'] = self.t_max
        if self.samples is not None:
            data['samples'] = self.samples
        return data


def _flag_for(message: str) -> str:
    if message.startswith('m1'):
        return "'--m1'"
    if message.startswith('m2'):
        return "'--m2'"
    if message.startswith('sector requires'):
        return "'--m1' / '--m2'"
    return "'--L' / '--N'"


def build_sector(L: int, N: int, m1: int, m2: int) -> Sector:
    try:
        return Sector(L, N, m1, m2)
    except SectorError as e:
        raise click.BadParameter(str(e), param_hint=_flag_for(str(e)))


def check_torus(L: int, N: int, m1: int) -> None:
    if L < 1 or N < 2:
        raise click.BadParameter(f"need L >= 1 and N >= 2, got L={L}, N={N}.", param_hint="'--L' / '--N'")
    if not 1 < m1 < L:
        raise click.BadParameter(
            f"m1 must satisfy 1 < m1 < L (m1 > 1 is required), got m1={m1}, L={L}.", param_hint="'--m1'"
        )


def build_params(q_text: str, a_text: str, N: int, mode: Optional[str]) -> Tuple[GibbsParams, Representation]:
    """
    Parses ``--q`` and ``--a``. The arithmetic follows the input syntax
    unless ``--mode`` asks for float or log explicitly.
    """
    try:
        q = parse_scalar(q_text)
    except ParameterError as e:
        raise click.BadParameter(str(e), param_hint="'--q'")
    try:
        a = tuple(parse_scalar_list(a_text))
    except ParameterError as e:
        raise click.BadParameter(str(e), param_hint="'--a'")
    if len(a) != N:
        raise click.BadParameter(f"expected {N} comma separated activities, got {len(a)}.", param_hint="'--a'")
    try:
        params = GibbsParams(q, a)
    except ParameterError as e:
        hint = "'--q'" if str(e).startswith('q') else "'--a'"
        raise click.BadParameter(str(e), param_hint=hint)
    if mode is None:
        return params, Representation.RATIONAL if params.is_exact else Representation.FLOAT
    representation = Representation(mode)
    if representation is Representation.RATIONAL and not params.is_exact:
        raise click.UsageError(
            "--mode rational needs exact inputs; write q and the activities as fractions such as 1/2."
        )
    return params, representation


def base_config(ctx: click.Context, command: str, **kwargs) -> RunConfig:
    obj = ctx.find_root().obj or {}
    settings = get_config()
    threads = obj.get('THREADS') or settings.get('threads', 1)
    progress = bool(settings.get('progress_bars', False)) and obj.get('VERBOSE', 0) > 0
    config = RunConfig(command=command, threads=threads, progress=progress, tolerance=get_float_tolerance())
    return replace(config, **kwargs)


def dispatch(ctx: click.Context, config: RunConfig, execute: Callable[[RunConfig], int]):
    """Returns the parsed config in parse-only mode, otherwise runs and exits with its code."""
    obj = ctx.find_root().obj or {}
    if obj.get('PARSE_ONLY'):
        return config
    code = execute(config)
    ctx.exit(code)


def guarded(execute: Callable[[RunConfig], int]) -> Callable[[RunConfig], int]:
    """Maps library errors onto click exceptions with the documented exit codes."""
    def wrapper(config: RunConfig) -> int:
        try:
            return execute(config)
        except EnumerationLimitError as e:
            raise ResourceLimitError(str(e))
        except (SectorError, ParameterError, StructuralError) as e:
            raise click.UsageError(str(e))
        except TorusError as e:
            logger.error(f"{type(e).__name__}: {e}")
            emit(config, {'passed': False, 'error': {'type': type(e).__name__, 'message': str(e)}})
            return EXIT_FAILED
    wrapper.__name__ = execute.__name__
    wrapper.__doc__ = execute.__doc__
    return wrapper


def emit(config: RunConfig, payload: Dict) -> None:
    """Prints a versioned JSON report with the run's parameters to stdout."""
    body = {'parameters': config.provenance()}
    body.update(payload)
    click.echo(dumps(report(config.command, body)))


def sector_options(require_m2: bool = True):
    """``--L --N --m1 --m2`` on a command."""
    def decorator(f):
        f = click.option('--m2', type=int, required=require_m2, help='Topological sector index (1 <= m2 < N).')(f)
        f = click.option('--m1', type=int, required=True, help='Particles per row (1 < m1 < L).')(f)
        f = click.option('--N', 'N', type=int, required=True, help='Number of rows (vertical period).')(f)
        f = click.option('--L', 'L', type=int, required=True, help='Sites per row (horizontal period).')(f)
        return f
    return decorator


def gibbs_options(f):
    """``--q --a --mode`` on a command."""
    f = click.option('--mode', type=click.Choice([r.value for r in Representation]), default=None,
                     help='Arithmetic; defaults to rational for fraction inputs and float otherwise.')(f)
    f = click.option('--a', 'a', required=True, help='Row activities a_1..a_N, comma separated (e.g. 1,2,1/2).')(f)
    f = click.option('--q', 'q', required=True, help='Parameter q in [0, 1): "1/2" is exact, "0.5" is float.')(f)
    return f


def max_states_option(f):
    return click.option('--max-states', type=int, default=None,
                        help='Enumeration cap on C(L, m1)^N for this run (overrides config and environment).')(f)
