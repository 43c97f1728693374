import sys
import logging
from typing import List, Optional

import click

from .commands import (
    enumerate as enumerate_cmd,
    verify as verify_cmd,
    simulate as simulate_cmd,
    connect as connect_cmd,
    info as info_cmd,
)
from .commands.common import RunConfig
from .commands.config import manage_config as config_command
from .config import ensure_config_dir_exists

logger = logging.getLogger(__name__)

# command name -> execute(RunConfig)
EXECUTORS = {
    "enumerate": enumerate_cmd.execute,
    "verify stationarity": verify_cmd.execute_stationarity,
    "verify identity": verify_cmd.execute_identity,
    "verify balance": verify_cmd.execute_balance,
    "verify ergodicity": verify_cmd.execute_ergodicity,
    "simulate": simulate_cmd.execute,
    "connect": connect_cmd.execute,
    "info": info_cmd.execute,
}


# --- Configure Logging ---
def configure_logging(verbose: int, quiet: bool):
    """Configures logging level."""
    log_level = logging.WARNING
    if quiet:
        log_level = logging.ERROR
    elif verbose == 1:
        log_level = logging.INFO
    elif verbose >= 2:
        log_level = logging.DEBUG

    logging.basicConfig(
        level=log_level,
        format='%(levelname)-8s %(name)s:%(filename)s:%(lineno)d %(message)s',
        stream=sys.stderr,
    )

    logger.debug(f"Logging configured to level: {logging.getLevelName(log_level)}")


# --- CLI Setup ---
@click.group()
@click.version_option(package_name='qwhittaker-torus')
@click.option('-v', '--verbose', count=True, help='Increase verbosity (use -vv for debug).')
@click.option('-q', '--quiet', is_flag=True, help='Suppress all output except errors.')
@click.option('--threads', type=click.IntRange(min=1), default=None,
              help='Worker threads for generator construction (default from config).')
@click.pass_context
def cli(ctx, verbose, quiet, threads):
    """qwt: periodic q-Whittaker particle dynamics on the torus and its Gibbs measure."""
    ensure_config_dir_exists()
    configure_logging(verbose, quiet)
    ctx.ensure_object(dict)
    ctx.obj['VERBOSE'] = verbose
    ctx.obj['QUIET'] = quiet
    ctx.obj['THREADS'] = threads


cli.add_command(enumerate_cmd.enumerate_cmd, name="enumerate")
cli.add_command(verify_cmd.verify, name="verify")
cli.add_command(simulate_cmd.simulate, name="simulate")
cli.add_command(connect_cmd.connect, name="connect")
cli.add_command(info_cmd.info, name="info")
cli.add_command(config_command, name="config")


def parse_args(argv: List[str]) -> RunConfig:
    """
    Parses a command line into a validated RunConfig without running it.

    Raises:
        click.UsageError: for unknown commands, missing or invalid options.
    """
    result = cli.main(args=list(argv), prog_name="qwt", standalone_mode=False, obj={'PARSE_ONLY': True})
    if not isinstance(result, RunConfig):
        raise click.UsageError(f"'{' '.join(argv)}' does not describe a runnable command.")
    return result


def run(config: RunConfig) -> int:
    """Runs a parsed RunConfig; returns the process exit code."""
    execute = EXECUTORS.get(config.command)
    if execute is None:
        raise click.UsageError(f"Unknown command '{config.command}'.")
    try:
        return execute(config)
    except click.ClickException as e:
        e.show()
        return e.exit_code


# --- Entry Point ---
def main(argv: Optional[List[str]] = None):
    cli(args=argv, obj={})


if __name__ == '__main__':
    main()
