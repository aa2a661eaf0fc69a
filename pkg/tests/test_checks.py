import pytest

from trispin.checks import CLAIMS, RANDOM_POINTS, REFERENCE_ABC, CheckContext, run_claims


@pytest.fixture(scope="module")
def corrected_spectrum():
    (result,) = run_claims(CheckContext(), only=["corrected_spectrum"])
    return result


def test_sample_points_cover_reference_and_hundred_random_points():
    points = CheckContext(seed=4).sample_points()
    assert RANDOM_POINTS == 100
    assert len(points) == 101
    assert points[0] == REFERENCE_ABC
    assert all(-5 <= x <= 5 for point in points[1:] for x in point)


def test_corrected_spectrum_compares_projectors_at_every_point(corrected_spectrum):
    assert corrected_spectrum.reproduced
    assert corrected_spectrum.evidence["points"] == 101
    assert corrected_spectrum.evidence["max_relative_projector_residual"] <= 1e-10
    assert corrected_spectrum.evidence["max_relative_eigenvalue_gap"] <= 1e-10


def test_claim_ids_are_unique():
    ids = [entry.id for entry in CLAIMS]
    assert len(ids) == len(set(ids))


def test_unknown_claim_selection_runs_nothing():
    assert run_claims(CheckContext(), only=["no_such_claim"]) == []
