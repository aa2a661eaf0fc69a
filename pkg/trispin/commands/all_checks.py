"""`trispin all-checks`: run the audited claim ledger"""
import logging

import click

from ..checks import CLAIMS, CheckContext, run_claims
from ..exclusion_protocol import GRID_POINTS
from ..reports import Report
from . import common_options, finish, handle_errors, load_run_config, parameters_of, require_json

logger = logging.getLogger(__name__)


@click.command("all-checks")
@click.option("--workers", type=int, default=None, help="Worker threads for grid scans and sampling")
@click.option("--claim", "claims", multiple=True, type=click.Choice([c.id for c in CLAIMS]),
              help="Run only the named claim (repeatable)")
@common_options
@handle_errors
def command(workers, claims, config_path, output, out, seed):
    """Reproduce every audited claim; exit 0 iff each matches its audited status."""
    cfg = load_run_config("all-checks", config_path, workers=workers, output=output, seed=seed)
    require_json(cfg)
    ctx = CheckContext(seed=cfg.seed, workers=cfg.workers, grid_points=GRID_POINTS)
    results = run_claims(ctx, only=list(claims) or None)
    report = Report(
        command="all-checks",
        parameters={**parameters_of(cfg, "seed", "workers"), "claims": [r.id for r in results]},
        result={"claims": [r.as_dict() for r in results]},
        verdicts={r.id: r.reproduced for r in results},
    )
    reproduced = sum(r.reproduced for r in results)
    logger.info(f"{reproduced}/{len(results)} claims reproduced their audited status")
    finish(report, out)
