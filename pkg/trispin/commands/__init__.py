"""Shared plumbing for the CLI commands: common options, config resolution, exit codes"""
import functools
import logging
from typing import Any, Callable, Dict, Optional

import click
from pydantic import ValidationError

from ..config import RunConfig, resolve_config
from ..reports import Report, write_output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_INVALID_INPUT = 2


def common_options(func: Callable) -> Callable:
    """--config, --output, --out and --seed, shared by every command"""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="key=value or JSON config file; flags override it"),
        click.option("--output", type=click.Choice(["json", "csv"]), default=None,
                     help="Report format (default json)"),
        click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Report file (default stdout)"),
        click.option("--seed", type=int, default=None, help="Root seed of every random stream (default 0)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def handle_errors(func: Callable) -> Callable:
    """Map invalid input and unusable file paths to exit 2, failed certifications to exit 1"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except ValidationError as e:
            logger.error(f"Invalid parameters: {e.errors(include_url=False)}")
            ctx.exit(EXIT_INVALID_INPUT)
        except ValueError as e:
            logger.error(f"Invalid input: {e}")
            ctx.exit(EXIT_INVALID_INPUT)
        except OSError as e:
            logger.error(f"File error: {e}")
            ctx.exit(EXIT_INVALID_INPUT)
        except RuntimeError as e:
            logger.error(f"Certification failed: {e}")
            ctx.exit(EXIT_CLAIM_FAILED)

    return wrapper


def load_run_config(command: str, config_path: Optional[str], **overrides: Any) -> RunConfig:
    return resolve_config(command, config_path, overrides)


def parameters_of(cfg: RunConfig, *names: str) -> Dict[str, Any]:
    return {name: getattr(cfg, name) for name in names}


def require_json(cfg: RunConfig) -> None:
    if cfg.output != "json":
        raise click.UsageError(f"command {cfg.command!r} only writes JSON reports")


def finish(report: Report, out: Optional[str], text: Optional[str] = None) -> None:
    """Write the report (or `text` in its place) and exit 1 if any verdict failed"""
    write_output(text if text is not None else report.dumps(), out)
    failed = [name for name, ok in report.verdicts.items() if not ok]
    if failed:
        logger.warning(f"{report.command}: failed verdicts {', '.join(failed)}")
        click.get_current_context().exit(EXIT_CLAIM_FAILED)
    logger.info(f"{report.command}: all verdicts pass")
