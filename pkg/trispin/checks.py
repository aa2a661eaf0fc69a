"""
Audited claims about the three-spin model and the exclusion protocol.

Each claim carries the status an audit established for it: HOLDS, or REFUTED with
pinned evidence of how it fails. A claim is reproduced when the check observes
that status and, for refuted claims, the same evidence. run_claims is the engine
behind `trispin all-checks`.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from . import hamiltonian
from .exclusion_protocol import (
    MeasurementBasis,
    ZERO_PROBABILITY_TOL,
    build_preparations,
    find_exclusion_matching,
    identity_pairing_failures,
    pbr_two_qubit_protocol,
    scan_exclusion,
    theta_grid,
)
from .linalg_core import hermitian_eigendecomposition, spectral_projector_residual
from .ontic_models import (
    build_overlap_toy_model,
    build_psi_ontic_model,
    consistency_check,
    forbidden_outcome_bound,
    model_prediction,
    monte_carlo_run,
    pigeonhole_floor,
    random_response,
)
from .rng import SeededRNG

logger = logging.getLogger(__name__)

HOLDS = "holds"
REFUTED = "refuted"

REFERENCE_ABC = (1.0, 2.0, 7.0)
DEGENERATE_ABC = (1.0, 2.0, 3.0)
RANDOM_POINTS = 100
PARAMETER_RANGE = 5.0
SPECTRUM_TOL = 1e-10
PROJECTOR_TOL = 1e-10
PROBABILITY_TOL = 1e-12
EXPECTED_MATCHING = (1, 6, 5, 2, 3, 8, 4, 7)
TOY_Q_VALUES = (0.1, 0.25, 0.5, 1.0)
RANDOM_RESPONSES = 50
MC_SAMPLES = 100_000
MC_SIGMAS = 5.0


def identity_pair_probability(theta: float) -> float:
    """P(e2 | Psi2) = cos^2(theta/2) sin^4(theta/2)"""
    return math.cos(theta / 2) ** 2 * math.sin(theta / 2) ** 4


@dataclass(frozen=True)
class CheckContext:
    seed: int = 0
    workers: int = 1
    grid_points: int = 99

    def sample_points(self) -> List[Tuple[float, float, float]]:
        """REFERENCE_ABC followed by RANDOM_POINTS draws from [-5, 5]^3"""
        generator = SeededRNG(self.seed).stream(0)
        draws = generator.uniform(-PARAMETER_RANGE, PARAMETER_RANGE, size=(RANDOM_POINTS, 3))
        return [REFERENCE_ABC] + [tuple(float(x) for x in row) for row in draws]


@dataclass(frozen=True)
class ClaimOutcome:
    observed: str
    evidence: Dict[str, Any]
    evidence_ok: bool = True


@dataclass(frozen=True)
class Claim:
    id: str
    statement: str
    audited: str
    check: Callable[[CheckContext], ClaimOutcome]


@dataclass(frozen=True)
class ClaimResult:
    id: str
    statement: str
    audited: str
    observed: str
    evidence: Dict[str, Any] = field(default_factory=dict)
    evidence_ok: bool = True

    @property
    def reproduced(self) -> bool:
        return self.observed == self.audited and self.evidence_ok

    def as_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "statement": self.statement,
            "audited": self.audited,
            "observed": self.observed,
            "reproduced": self.reproduced,
            "evidence": self.evidence,
        }


CLAIMS: List[Claim] = []


def claim(claim_id: str, statement: str, audited: str = HOLDS):
    def register(check: Callable[[CheckContext], ClaimOutcome]):
        CLAIMS.append(Claim(claim_id, statement, audited, check))
        return check
    return register


def _status(ok: bool) -> str:
    return HOLDS if ok else REFUTED


# =============================================================================
# Hamiltonian claims
# =============================================================================

@claim("matrix_structure", "printed matrix is real symmetric with zero trace")
def check_matrix_structure(ctx: CheckContext) -> ClaimOutcome:
    worst_symmetry, worst_trace = 0.0, 0.0
    for a, b, c in ctx.sample_points():
        h = hamiltonian.explicit_matrix(a, b, c).entries
        worst_symmetry = max(worst_symmetry, float(np.max(np.abs(h - h.T))))
        worst_trace = max(worst_trace, abs(complex(np.trace(h))))
    ok = worst_symmetry <= PROBABILITY_TOL and worst_trace <= PROBABILITY_TOL
    return ClaimOutcome(_status(ok), {"max_asymmetry": worst_symmetry, "max_abs_trace": worst_trace})


@claim(
    "builder_matches_matrix",
    "field, exchange and three-spin tensors reproduce the printed matrix",
    audited=REFUTED,
)
def check_builder_matches_matrix(ctx: CheckContext) -> ClaimOutcome:
    a, b, c = REFERENCE_ABC
    cfg = hamiltonian.CouplingConfig.standard(a, b, c)
    built = hamiltonian.build_hamiltonian(cfg).entries
    printed = hamiltonian.explicit_matrix(a, b, c).entries
    residual = hamiltonian.verify_builder(cfg)
    diagonal_gap = float(np.max(np.abs(np.diag(built) - np.diag(printed))))
    three_flip_gap = complex(printed[1, 6] - built[1, 6])
    zero_point = hamiltonian.verify_builder(hamiltonian.CouplingConfig.standard(0.0, 0.0, 0.0))
    calibration = hamiltonian.calibrate_builder()
    evidence = {
        "abc": list(REFERENCE_ABC),
        "residual": residual,
        "residual_at_origin": zero_point,
        "diagonal_gap": diagonal_gap,
        "printed_minus_built_1_6": three_flip_gap.real,
        "calibration_matched": calibration.matched,
    }
    pinned = (
        diagonal_gap <= hamiltonian.BUILDER_TOL
        and abs(three_flip_gap - 2 * (a - b)) <= hamiltonian.BUILDER_TOL
        and zero_point == 0.0
    )
    return ClaimOutcome(_status(residual <= hamiltonian.BUILDER_TOL), evidence, pinned)


@claim("kets_are_eigenvectors", "the eight printed kets are eigenvectors of the printed matrix")
def check_kets_are_eigenvectors(ctx: CheckContext) -> ClaimOutcome:
    worst = 0.0
    ok = True
    for a, b, c in ctx.sample_points():
        audit = hamiltonian.audit_analytic_spectrum(a, b, c)
        ok = ok and audit.kets_are_eigenvectors
        worst = max(worst, max(audit.eigenvector_residuals.values()) / max(audit.scale, 1.0))
    return ClaimOutcome(_status(ok), {"points": len(ctx.sample_points()), "max_relative_residual": worst})


@claim("kets_orthonormal", "the printed kets form an orthonormal, complete basis")
def check_kets_orthonormal(ctx: CheckContext) -> ClaimOutcome:
    basis = MeasurementBasis.analytic()
    error = max(basis.orthonormality_error(), basis.projector_algebra_error())
    return ClaimOutcome(_status(error <= PROBABILITY_TOL), {"max_deviation": error})


@claim("printed_eigenvalues", "the printed linear forms are the eigenvalues of the printed kets", audited=REFUTED)
def check_printed_eigenvalues(ctx: CheckContext) -> ClaimOutcome:
    recovered = hamiltonian.recovered_eigenvalue_forms()
    misprinted = [
        label for label, form in hamiltonian.PRINTED_EIGENVALUE_FORMS.items()
        if tuple(float(x) for x in form) != recovered[label]
    ]
    evidence = {
        "misprinted": misprinted,
        "recovered": {f"E{label}": list(recovered[label]) for label in misprinted},
        "printed": {f"E{label}": list(hamiltonian.PRINTED_EIGENVALUE_FORMS[label]) for label in misprinted},
    }
    pinned = misprinted == [4] and recovered[4] == (-6.0, -2.0, -2.0)
    return ClaimOutcome(_status(not misprinted), evidence, pinned)


@claim("corrected_spectrum", "corrected analytic spectrum matches exact diagonalization")
def check_corrected_spectrum(ctx: CheckContext) -> ClaimOutcome:
    worst_value, worst_projector = 0.0, 0.0
    for a, b, c in ctx.sample_points():
        analytic = hamiltonian.analytic_spectrum(a, b, c, corrected=True)
        numeric = hermitian_eigendecomposition(hamiltonian.explicit_matrix(a, b, c))
        scale = max(float(np.max(np.abs(numeric.eigenvalues))), 1.0)
        worst_value = max(worst_value, float(np.max(np.abs(analytic.eigenvalues - numeric.eigenvalues))) / scale)
        worst_projector = max(worst_projector, spectral_projector_residual(analytic, numeric) / scale)
    ok = worst_value <= SPECTRUM_TOL and worst_projector <= PROJECTOR_TOL
    evidence = {
        "max_relative_eigenvalue_gap": worst_value,
        "max_relative_projector_residual": worst_projector,
        "points": len(ctx.sample_points()),
    }
    return ClaimOutcome(_status(ok), evidence)


@claim(
    "degeneracy_remark",
    "pairwise distinct |a|, |b|, |c| keep the printed eigenvalues distinct",
    audited=REFUTED,
)
def check_degeneracy_remark(ctx: CheckContext) -> ClaimOutcome:
    a, b, c = DEGENERATE_ABC
    printed = hamiltonian.degeneracy_report(a, b, c)
    recovered = hamiltonian.degeneracy_report(a, b, c, forms=hamiltonian.recovered_eigenvalue_forms())
    reference = hamiltonian.degeneracy_report(*REFERENCE_ABC)
    premise = hamiltonian.pairwise_distinct_magnitudes(a, b, c)
    evidence = {
        "abc": list(DEGENERATE_ABC),
        "printed_collisions": [{"pair": [h.i, h.j], "form": h.form} for h in printed.collisions],
        "true_collisions": [{"pair": [h.i, h.j], "form": h.form} for h in recovered.collisions],
        "collisions_at_reference": len(reference.collisions),
    }
    forms = {(h.i, h.j): h.form for h in printed.collisions}
    pinned = forms.get((1, 4)) == "a + b - c" and recovered.pairs == ((2, 6),) and not reference
    return ClaimOutcome(_status(not (premise and printed)), evidence, pinned)


# =============================================================================
# Exclusion claims
# =============================================================================

@claim("exclusion_matching", "a theta-independent perfect exclusion matching exists")
def check_exclusion_matching(ctx: CheckContext) -> ClaimOutcome:
    scan = scan_exclusion(theta_grid(ctx.grid_points), workers=ctx.workers)
    ok = scan.stable and scan.max_certified_probability <= ZERO_PROBABILITY_TOL
    evidence = {
        "grid_points": len(scan.thetas),
        "permutation": list(scan.permutation) if scan.stable else None,
        "max_certified_probability": scan.max_certified_probability,
    }
    return ClaimOutcome(_status(ok), evidence, scan.permutation == EXPECTED_MATCHING)


@claim("identity_pairing", "outcome e_i excludes preparation Psi_i for every i", audited=REFUTED)
def check_identity_pairing(ctx: CheckContext) -> ClaimOutcome:
    basis = MeasurementBasis.analytic()
    scan = scan_exclusion(theta_grid(ctx.grid_points), basis, workers=ctx.workers)
    first_failures = []
    worst_closed_form = 0.0
    for theta, table in zip(scan.thetas, scan.tables):
        failures = identity_pairing_failures(table)
        if failures:
            index, probability = failures[0]
            first_failures.append(index)
            worst_closed_form = max(worst_closed_form, abs(probability - identity_pair_probability(theta)))
    evidence = {
        "first_failure_indices": sorted(set(first_failures)),
        "max_closed_form_error": worst_closed_form,
    }
    pinned = len(first_failures) == len(scan.thetas) and set(first_failures) == {2} and worst_closed_form <= PROBABILITY_TOL
    return ClaimOutcome(_status(not first_failures), evidence, pinned)


@claim("pbr_two_qubit", "the entangled two-qubit basis excludes each of the four preparations")
def check_pbr_two_qubit(ctx: CheckContext) -> ClaimOutcome:
    protocol = pbr_two_qubit_protocol()
    table = protocol.table
    zeros = [float(table[i - 1, k]) for k, i in enumerate(protocol.matching.pairs)]
    basis_error = protocol.basis.orthonormality_error()
    p_xi4 = float(table[0, 3])
    ok = (
        max(zeros) <= ZERO_PROBABILITY_TOL
        and basis_error <= PROBABILITY_TOL
        and abs(p_xi4 - 0.5) <= PROBABILITY_TOL
        and protocol.matching.pairs == (1, 2, 3, 4)
    )
    evidence = {"matched_probabilities": zeros, "basis_error": basis_error, "p_xi4_given_00": p_xi4}
    return ClaimOutcome(_status(ok), evidence)


# =============================================================================
# Ontic model claims
# =============================================================================

@claim("pbr_bound", "any model with overlap q per party predicts a forbidden outcome with probability >= q^3/8")
def check_pbr_bound(ctx: CheckContext) -> ClaimOutcome:
    family = build_preparations(math.pi / 4)
    basis = MeasurementBasis.analytic()
    matching = find_exclusion_matching(family, basis)
    rng = SeededRNG(ctx.seed)
    worst_margin = math.inf
    worst_floor_error = 0.0
    for index, q in enumerate(TOY_Q_VALUES):
        generator = rng.stream(1, index)
        floor = q ** 3 / 8
        toy = build_overlap_toy_model(q)
        worst_floor_error = max(worst_floor_error, abs(pigeonhole_floor(toy) - floor))
        for _ in range(RANDOM_RESPONSES):
            table = random_response(toy.space.n_joint, toy.n_outcomes, generator)
            model = build_overlap_toy_model(q, response=table)
            worst_margin = min(worst_margin, forbidden_outcome_bound(model, matching) - floor)
    ok = worst_margin >= -PROBABILITY_TOL and worst_floor_error <= PROBABILITY_TOL
    evidence = {
        "q_values": list(TOY_Q_VALUES),
        "responses_per_q": RANDOM_RESPONSES,
        "min_margin_over_floor": worst_margin,
        "max_floor_error": worst_floor_error,
    }
    return ClaimOutcome(_status(ok), evidence)


@claim("psi_ontic_consistent", "the psi-ontic model reproduces the quantum statistics")
def check_psi_ontic(ctx: CheckContext) -> ClaimOutcome:
    basis = MeasurementBasis.analytic()
    worst, overlap, violations = 0.0, 0.0, 0
    for theta in (math.pi / 6, math.pi / 4, math.pi / 3):
        family = build_preparations(theta)
        model = build_psi_ontic_model(family, basis)
        report = consistency_check(model, family, basis, eps=1e-9)
        worst = max(worst, report.max_deviation)
        overlap = max(overlap, max(model.overlap_mass))
        violations += len(report.violations)
    ok = worst <= 1e-9 and overlap == 0.0 and violations == 0
    return ClaimOutcome(_status(ok), {"max_deviation": worst, "max_overlap_mass": overlap, "violations": violations})


@claim("monte_carlo", "sampled frequencies agree with exact predictions and are reproducible")
def check_monte_carlo(ctx: CheckContext) -> ClaimOutcome:
    family = build_preparations(math.pi / 4)
    basis = MeasurementBasis.analytic()
    matching = find_exclusion_matching(family, basis)
    preparation = 1
    outcome = matching.forbidden_outcome(preparation)

    toy = build_overlap_toy_model(0.5)
    exact = float(model_prediction(toy, preparation)[outcome - 1])
    first = monte_carlo_run(toy, preparation, MC_SAMPLES, ctx.seed, workers=ctx.workers)
    again = monte_carlo_run(toy, preparation, MC_SAMPLES, ctx.seed, workers=ctx.workers)
    sigma = math.sqrt(exact * (1 - exact) / MC_SAMPLES)
    deviation = abs(float(first[outcome - 1]) - exact)

    psi = build_psi_ontic_model(family, basis)
    psi_frequency = float(monte_carlo_run(psi, preparation, MC_SAMPLES, ctx.seed)[outcome - 1])

    ok = deviation <= MC_SIGMAS * sigma and np.array_equal(first, again) and psi_frequency == 0.0
    evidence = {
        "samples": MC_SAMPLES,
        "toy_exact": exact,
        "toy_frequency": float(first[outcome - 1]),
        "sigma": sigma,
        "psi_ontic_forbidden_frequency": psi_frequency,
    }
    return ClaimOutcome(_status(ok), evidence)


# =============================================================================
# Runner
# =============================================================================

def run_claims(ctx: Optional[CheckContext] = None, only: Optional[List[str]] = None) -> List[ClaimResult]:
    ctx = ctx or CheckContext()
    selected = [c for c in CLAIMS if only is None or c.id in only]
    results = []
    for entry in selected:
        try:
            outcome = entry.check(ctx)
        except (ValueError, RuntimeError) as e:
            logger.error(f"✗ {entry.id}: check raised {type(e).__name__}: {e}")
            outcome = ClaimOutcome("error", {"error": str(e)}, False)
        result = ClaimResult(entry.id, entry.statement, entry.audited, outcome.observed, outcome.evidence, outcome.evidence_ok)
        if result.reproduced:
            logger.info(f"✓ {entry.id}: {result.observed} (as audited)")
        else:
            logger.warning(
                f"✗ {entry.id}: observed {result.observed}, audited {entry.audited}"
                + ("" if outcome.evidence_ok else ", evidence differs")
            )
        results.append(result)
    return results
