import click

from .. import config as settings
from ..config import (
    DEFAULT_CONFIG,
    ENUMERATION_CAP_ENV,
    get_config,
    get_enumeration_cap,
    set_config_value,
)
from ..errors import ParameterError


@click.group(name="config")
def manage_config():
    """View or modify qwt configuration."""
    pass


@manage_config.command()
def show():
    """Show current configuration."""
    config = get_config()
    click.echo("Current Configuration:")
    for key in sorted(DEFAULT_CONFIG):
        marker = "" if config.get(key) == DEFAULT_CONFIG[key] else "  (changed)"
        click.echo(f"  {key}: {config.get(key)}{marker}")

    # The environment can override the stored cap
    effective = get_enumeration_cap()
    if effective != config.get('enumeration_cap'):
        click.echo(f"\n  Effective enumeration cap: {effective} (from {ENUMERATION_CAP_ENV})")


@manage_config.command(name="set")
@click.argument('key', type=click.Choice(sorted(DEFAULT_CONFIG)))
@click.argument('value')
def set_value(key, value):
    """Set KEY to VALUE."""
    try:
        stored = set_config_value(key, value)
    except ParameterError as e:
        raise click.BadParameter(str(e), param_hint="'VALUE'")
    click.echo(f"{key} = {stored}")


@manage_config.command()
def path():
    """Print the location of the configuration file."""
    click.echo(str(settings.CONFIG_FILE))
