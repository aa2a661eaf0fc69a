"""`trispin exclusion`: Born tables and the exclusion matching at one theta or over a grid"""
import logging

import click

from ..exclusion_protocol import (
    GRID_POINTS,
    MeasurementBasis,
    identity_pairing_failures,
    scan_exclusion,
    theta_grid,
)
from ..reports import Report, scan_csv
from . import common_options, finish, handle_errors, load_run_config, parameters_of

logger = logging.getLogger(__name__)


@click.command("exclusion")
@click.option("--theta", type=float, default=None, help="Preparation angle in (0, pi/2)")
@click.option("--grid", type=int, default=None, help=f"Interior grid points over (0, pi/2) (default {GRID_POINTS})")
@click.option("--workers", type=int, default=None, help="Worker threads for the grid scan")
@common_options
@handle_errors
def command(theta, grid, workers, config_path, output, out, seed):
    """Certify the outcome -> excluded-preparation matching."""
    cfg = load_run_config(
        "exclusion", config_path, theta=theta, grid=grid, workers=workers, output=output, seed=seed
    )
    if cfg.theta is not None and cfg.grid is not None:
        raise click.UsageError("--theta and --grid are mutually exclusive")
    thetas = [cfg.theta] if cfg.theta is not None else list(theta_grid(cfg.grid or GRID_POINTS))

    basis = MeasurementBasis.analytic()
    scan = scan_exclusion(thetas, basis, workers=cfg.workers)

    points = []
    for value, table, matching in zip(scan.thetas, scan.tables, scan.matchings):
        failures = identity_pairing_failures(table)
        points.append({
            "theta": value,
            "probability_table": table,
            "matching": matching.as_dict(basis.labels),
            "certified_max_amplitude": matching.certified_amplitude,
            "identity_pairing_first_failure": (
                {"index": failures[0][0], "probability": failures[0][1]} if failures else None
            ),
        })
    result = {
        "outcome_labels": list(basis.labels),
        "permutation": list(scan.permutation) if scan.stable else None,
        "max_certified_probability": scan.max_certified_probability,
        "points": points,
    }
    verdicts = {"perfect_matching": True, "theta_stable": scan.stable}
    report = Report(
        command="exclusion",
        parameters={**parameters_of(cfg, "theta", "grid"), "points": len(scan.thetas)},
        result=result,
        verdicts=verdicts,
    )
    text = scan_csv(scan.thetas, scan.tables) if cfg.output == "csv" else None
    finish(report, out, text)
