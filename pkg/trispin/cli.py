"""Command-line entry point"""
import logging
import sys

import click

from . import __version__
from .commands import all_checks, exclusion, hamiltonian, ontic, pbr2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: str) -> None:
    # Reports go to stdout; logs stay on stderr
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr, force=True)


@click.group()
@click.version_option(__version__, prog_name="trispin")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]), default="INFO",
              show_default=True, help="Log verbosity (stderr)")
def main(log_level):
    """Verify the three-spin Hamiltonian and the state-exclusion protocol built on it."""
    configure_logging(log_level)


main.add_command(hamiltonian.command)
main.add_command(exclusion.command)
main.add_command(pbr2.command)
main.add_command(ontic.command)
main.add_command(all_checks.command)
