"""`trispin hamiltonian`: printed matrix, builder residual, spectra and degeneracies"""
import logging

import click

from .. import hamiltonian
from ..reports import Report
from . import common_options, finish, handle_errors, load_run_config, parameters_of, require_json

logger = logging.getLogger(__name__)


def _collisions(report: hamiltonian.DegeneracyReport):
    return [{"pair": [hit.i, hit.j], "form": hit.form} for hit in report.collisions]


def _spectrum(spectrum):
    return [{"label": pair.label, "eigenvalue": pair.eigenvalue} for pair in spectrum.pairs]


def build_report(a: float, b: float, c: float, parameters: dict) -> Report:
    cfg = hamiltonian.CouplingConfig.standard(a, b, c)
    matrix = hamiltonian.explicit_matrix(a, b, c)
    residual = hamiltonian.verify_builder(cfg)
    calibration = hamiltonian.calibrate_builder()
    audit = hamiltonian.audit_analytic_spectrum(a, b, c)
    printed_degeneracy = hamiltonian.degeneracy_report(a, b, c)
    true_degeneracy = hamiltonian.degeneracy_report(a, b, c, forms=audit.recovered_forms)

    result = {
        "explicit_matrix": matrix.entries.real,
        "builder": {
            "residual": residual,
            "scale": calibration.scale,
            "ordering": calibration.ordering,
            "calibration_matched": calibration.matched,
        },
        "spectrum": {
            "printed": _spectrum(hamiltonian.analytic_spectrum(a, b, c)),
            "corrected": _spectrum(hamiltonian.analytic_spectrum(a, b, c, corrected=True)),
            "numeric": audit.numeric.eigenvalues,
            "misprinted_labels": list(audit.misprinted),
            "max_eigenvector_residual": max(audit.eigenvector_residuals.values()),
            "projector_residual": audit.projector_residual,
        },
        "degeneracy": {
            "pairwise_distinct_magnitudes": hamiltonian.pairwise_distinct_magnitudes(a, b, c),
            "printed_forms": _collisions(printed_degeneracy),
            "true_spectrum": _collisions(true_degeneracy),
        },
    }
    verdicts = {
        "builder_matches_matrix": residual <= hamiltonian.BUILDER_TOL,
        "kets_are_eigenvectors": audit.kets_are_eigenvectors,
    }
    return Report(command="hamiltonian", parameters=parameters, result=result, verdicts=verdicts)


@click.command("hamiltonian")
@click.option("--a", type=float, default=None, help="Parameter a (default 1)")
@click.option("--b", type=float, default=None, help="Parameter b (default 2)")
@click.option("--c", type=float, default=None, help="Parameter c (default 7)")
@common_options
@handle_errors
def command(a, b, c, config_path, output, out, seed):
    """Check the printed Hamiltonian against the builder and its printed spectrum."""
    cfg = load_run_config("hamiltonian", config_path, a=a, b=b, c=c, output=output, seed=seed)
    require_json(cfg)
    logger.info(f"Auditing Hamiltonian at (a, b, c) = ({cfg.a}, {cfg.b}, {cfg.c})")
    report = build_report(cfg.a, cfg.b, cfg.c, parameters_of(cfg, "a", "b", "c"))
    finish(report, out)
