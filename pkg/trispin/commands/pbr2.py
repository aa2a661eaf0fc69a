"""`trispin pbr2`: the two-qubit exclusion game"""
import logging

import click

from ..exclusion_protocol import ZERO_PROBABILITY_TOL, pbr_two_qubit_protocol
from ..reports import Report
from . import common_options, finish, handle_errors, load_run_config, require_json

logger = logging.getLogger(__name__)

BASIS_TOL = 1e-12


@click.command("pbr2")
@common_options
@handle_errors
def command(config_path, output, out, seed):
    """Certify the four zeros of the entangled two-qubit measurement."""
    cfg = load_run_config("pbr2", config_path, output=output, seed=seed)
    require_json(cfg)
    protocol = pbr_two_qubit_protocol()
    table = protocol.table
    zeros = {
        f"{label}|{''.join(protocol.labels[prep - 1])}": float(table[prep - 1, k])
        for k, (label, prep) in enumerate(zip(protocol.basis.labels, protocol.matching.pairs))
    }
    result = {
        "preparations": ["".join(labels) for labels in protocol.labels],
        "outcome_labels": list(protocol.basis.labels),
        "probability_table": table,
        "matching": protocol.matching.as_dict(protocol.basis.labels),
        "certified_zeros": zeros,
        "basis_orthonormality_error": protocol.basis.orthonormality_error(),
    }
    verdicts = {
        "four_zeros": all(p <= ZERO_PROBABILITY_TOL for p in zeros.values()),
        "basis_orthonormal": protocol.basis.orthonormality_error() <= BASIS_TOL,
    }
    logger.info(f"Two-qubit matching {protocol.matching.pairs}")
    finish(Report(command="pbr2", result=result, verdicts=verdicts), out)
