"""`trispin ontic`: overlap toy model versus psi-ontic model"""
import json
import logging
import math
from pathlib import Path

import click

from ..exclusion_protocol import MeasurementBasis, build_preparations, find_exclusion_matching
from ..ontic_models import (
    OnticModel,
    build_overlap_toy_model,
    build_psi_ontic_model,
    consistency_check,
    forbidden_outcome_bound,
    forbidden_outcome_probabilities,
    monte_carlo_run,
    pigeonhole_floor,
)
from ..reports import Report
from . import common_options, finish, handle_errors, load_run_config, parameters_of, require_json

logger = logging.getLogger(__name__)

THEORY_TOL = 1e-12
PSI_ONTIC_EPS = 1e-9
TOY_EPS = 1e-3
MC_SIGMAS = 5.0


def _load_model(path: str) -> OnticModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"cannot read ontic model file {path}: {e}") from e
    return OnticModel.from_dict(data)


def _consistency(report):
    return {
        "passed": report.passed,
        "eps": report.eps,
        "max_deviation": report.max_deviation,
        "violations": [
            {"preparation": v.preparation, "outcome": v.outcome, "probability": v.probability}
            for v in report.violations
        ],
    }


@click.command("ontic")
@click.option("--q", type=float, default=None, help="Per-party overlap mass in (0, 1] (default 0.5)")
@click.option("--samples", type=int, default=None, help="Monte Carlo draws per preparation (default 100000)")
@click.option("--theta", type=float, default=None, help="Preparation angle in (0, pi/2) (default pi/4)")
@click.option("--shards", type=int, default=None, help="Random substreams per preparation (default 1)")
@click.option("--workers", type=int, default=None, help="Sampling threads (default 1)")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None,
              help="JSON ontic model file to test instead of the overlap toy model")
@common_options
@handle_errors
def command(q, samples, theta, shards, workers, model_path, config_path, output, out, seed):
    """Exhibit the forbidden-outcome bound of an overlapping model."""
    cfg = load_run_config(
        "ontic", config_path,
        q=q, samples=samples, theta=theta, shards=shards, workers=workers, output=output, seed=seed,
    )
    require_json(cfg)
    theta_value = cfg.theta if cfg.theta is not None else math.pi / 4
    family = build_preparations(theta_value)
    basis = MeasurementBasis.analytic()
    matching = find_exclusion_matching(family, basis)

    model = _load_model(model_path) if model_path else build_overlap_toy_model(cfg.q)
    floor = pigeonhole_floor(model) if model_path else cfg.q ** 3 / 8
    bound = forbidden_outcome_bound(model, matching)
    exact = forbidden_outcome_probabilities(model, matching)
    logger.info(f"{model.name}: forbidden-outcome bound {bound:.6g}, pigeonhole floor {floor:.6g}")

    frequencies, agrees = [], True
    for prep in range(1, model.n_preparations + 1):
        outcome = matching.forbidden_outcome(prep)
        observed = float(monte_carlo_run(model, prep, cfg.samples, cfg.seed, cfg.shards, cfg.workers)[outcome - 1])
        p = float(exact[prep - 1])
        sigma = math.sqrt(p * (1 - p) / cfg.samples)
        agrees = agrees and abs(observed - p) <= MC_SIGMAS * sigma
        frequencies.append({
            "preparation": prep, "outcome": outcome, "exact": p, "frequency": observed, "standard_error": sigma,
        })

    psi = build_psi_ontic_model(family, basis)
    psi_report = consistency_check(psi, family, basis, PSI_ONTIC_EPS)
    model_report = consistency_check(model, family, basis, TOY_EPS)

    result = {
        "model": model.name,
        "overlap_mass": list(model.overlap_mass),
        "forbidden_outcome_bound": bound,
        "pigeonhole_floor": floor,
        "forbidden_outcome_probabilities": exact,
        "monte_carlo": {"samples": cfg.samples, "shards": cfg.shards, "forbidden": frequencies},
        "model_consistency": _consistency(model_report),
        "psi_ontic": {
            "overlap_mass": list(psi.overlap_mass),
            "forbidden_outcome_bound": forbidden_outcome_bound(psi, matching),
            "consistency": _consistency(psi_report),
        },
    }
    verdicts = {
        "bound_at_least_floor": bound >= floor - THEORY_TOL,
        "psi_ontic_consistent": psi_report.passed and not psi_report.violations,
        "monte_carlo_agrees": agrees,
    }
    parameters = {**parameters_of(cfg, "q", "samples", "seed", "shards"), "theta": theta_value,
                  "model_file": model_path}
    finish(Report(command="ontic", parameters=parameters, result=result, verdicts=verdicts), out)
