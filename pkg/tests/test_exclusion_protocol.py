import math

import numpy as np
import pytest

from trispin.exclusion_protocol import (
    NAMED_THETAS,
    MeasurementBasis,
    NoExclusionMatchingError,
    PreparationRangeError,
    amplitude_table,
    born_probability,
    build_preparations,
    find_exclusion_matching,
    identity_pairing_failures,
    pbr_two_qubit_protocol,
    probability_table,
    scan_exclusion,
    theta_grid,
)
from trispin.linalg_core import LinalgError, StateVector

EXPECTED_MATCHING = (1, 6, 5, 2, 3, 8, 4, 7)


@pytest.fixture(scope="module")
def basis():
    return MeasurementBasis.analytic()


class TestPreparations:
    @pytest.mark.parametrize("theta", [0.0, math.pi / 2, -0.1, 2.0, float("nan")])
    def test_theta_outside_open_interval_rejected(self, theta):
        with pytest.raises(PreparationRangeError):
            build_preparations(theta)

    def test_single_qubit_states(self):
        family = build_preparations(math.pi / 3)
        c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
        assert np.allclose(family.m.amps, [c, -s])
        assert np.allclose(family.n.amps, [c, s])
        assert abs(np.vdot(family.m.amps, family.mbar.amps)) <= 1e-15
        assert abs(np.vdot(family.n.amps, family.nbar.amps)) <= 1e-15

    def test_enumeration_order(self):
        family = build_preparations(math.pi / 4)
        assert family.labels[0] == ("m", "m", "mbar")
        assert family.labels[1] == ("m", "m", "nbar")
        assert family.labels[5] == ("n", "m", "nbar")
        assert family.labels[7] == ("n", "nbar", "nbar")

    def test_preparations_are_normalized_products(self):
        family = build_preparations(math.pi / 6)
        assert len(family.preparations) == 8
        for psi in family.preparations:
            assert np.vdot(psi.amps, psi.amps).real == pytest.approx(1.0, abs=1e-12)


class TestBasis:
    def test_printed_basis_is_a_complete_projective_measurement(self, basis):
        assert basis.labels == tuple(f"e{k}" for k in range(1, 9))
        assert basis.orthonormality_error() <= 1e-12
        assert basis.projector_algebra_error() <= 1e-12

    def test_non_orthogonal_vectors_rejected(self):
        zero = StateVector.basis(1, 0)
        plus = StateVector(np.array([1.0, 1.0]) / math.sqrt(2))
        with pytest.raises(LinalgError, match="orthonormal"):
            MeasurementBasis.from_states(["a", "b"], [zero, plus])

    def test_incomplete_basis_rejected(self):
        with pytest.raises(LinalgError, match="complete basis"):
            MeasurementBasis.from_states(["a"], [StateVector.basis(1, 0)])


class TestBornTables:
    def test_born_probability(self):
        plus = StateVector(np.array([1.0, 1.0]) / math.sqrt(2))
        assert born_probability(plus, StateVector.basis(1, 0)) == pytest.approx(0.5)

    def test_born_probability_requires_normalized_vectors(self):
        with pytest.raises(LinalgError, match="normalized"):
            born_probability(StateVector(np.array([2.0, 0.0]), normalized=False), StateVector.basis(1, 0))

    @pytest.mark.parametrize("name", sorted(NAMED_THETAS))
    def test_rows_sum_to_one(self, basis, name):
        table = probability_table(build_preparations(NAMED_THETAS[name]), basis)
        assert table.shape == (8, 8)
        assert np.max(np.abs(table.sum(axis=1) - 1.0)) <= 1e-12

    def test_largest_probability_is_at_most_one_half(self, basis):
        for theta in theta_grid(20):
            assert probability_table(build_preparations(theta), basis).max() <= 0.5 + 1e-12

    def test_closed_form_amplitudes(self, basis):
        theta = math.pi / 3
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        amps = amplitude_table(build_preparations(theta), basis)
        assert amps[2, 0].real == pytest.approx(-(c + s) * (c - s) ** 2 / 2, abs=1e-14)
        assert amps[7, 0].real == pytest.approx(-(c + s) / 2, abs=1e-14)


class TestMatching:
    @pytest.mark.parametrize("name", sorted(NAMED_THETAS))
    def test_matching_at_named_angles(self, basis, name):
        matching = find_exclusion_matching(build_preparations(NAMED_THETAS[name]), basis)
        assert matching.pairs == EXPECTED_MATCHING
        assert matching.certified_probability <= 1e-24

    def test_matched_amplitudes_vanish(self, basis):
        amps = amplitude_table(build_preparations(math.pi / 3), basis)
        zeros = np.abs(amps) <= 1e-12
        for outcome, prep in enumerate(EXPECTED_MATCHING):
            assert zeros[prep - 1, outcome]

    def test_excluded_preparation_lookups(self, basis):
        matching = find_exclusion_matching(build_preparations(math.pi / 4), basis)
        assert matching.excluded_by(2) == 6
        assert matching.forbidden_outcome(6) == 2
        assert matching.as_dict(basis.labels)["e8"] == 7

    def test_no_matching_raises_with_amplitudes(self, basis):
        computational = MeasurementBasis.from_states(
            [f"z{k}" for k in range(8)], [StateVector.basis(3, k) for k in range(8)]
        )
        family = build_preparations(math.pi / 5)
        with pytest.raises(NoExclusionMatchingError) as excinfo:
            find_exclusion_matching(family, computational)
        assert excinfo.value.amplitudes.shape == (8, 8)

    def test_identity_pairing_first_fails_at_two(self, basis):
        for theta in (math.pi / 6, math.pi / 4, math.pi / 3):
            c, s = math.cos(theta / 2), math.sin(theta / 2)
            failures = identity_pairing_failures(probability_table(build_preparations(theta), basis))
            assert failures[0][0] == 2
            assert failures[0][1] == pytest.approx(c ** 2 * s ** 4, abs=1e-12)

    def test_identity_pairing_value_at_pi_over_3(self, basis):
        failures = identity_pairing_failures(probability_table(build_preparations(math.pi / 3), basis))
        assert failures[0][1] == pytest.approx(3 / 64, abs=1e-12)


class TestScan:
    def test_grid_is_interior(self):
        grid = theta_grid(99)
        assert len(grid) == 99
        assert grid[0] == pytest.approx(math.pi / 200)
        assert 0 < grid.min() and grid.max() < math.pi / 2

    def test_grid_rejects_zero_points(self):
        with pytest.raises(ValueError):
            theta_grid(0)

    def test_scan_is_stable_and_order_preserving(self, basis):
        grid = theta_grid(99)
        scan = scan_exclusion(grid, basis, workers=4)
        assert scan.thetas == tuple(float(t) for t in grid)
        assert scan.stable
        assert scan.permutation == EXPECTED_MATCHING
        assert scan.max_certified_probability <= 1e-24

    def test_scan_is_worker_count_independent(self, basis):
        grid = theta_grid(9)
        serial = scan_exclusion(grid, basis, workers=1)
        threaded = scan_exclusion(grid, basis, workers=3)
        for first, second in zip(serial.tables, threaded.tables):
            assert np.array_equal(first, second)


class TestTwoQubitGame:
    def test_four_zeros(self):
        protocol = pbr_two_qubit_protocol()
        table = protocol.table
        assert protocol.matching.pairs == (1, 2, 3, 4)
        for i in range(4):
            assert table[i, i] <= 1e-24

    def test_basis_and_rows(self):
        protocol = pbr_two_qubit_protocol()
        assert protocol.basis.orthonormality_error() <= 1e-12
        assert np.max(np.abs(protocol.table.sum(axis=1) - 1.0)) <= 1e-12

    def test_xi4_given_00(self):
        protocol = pbr_two_qubit_protocol()
        assert protocol.labels[0] == ("0", "0")
        assert protocol.table[0, 3] == pytest.approx(0.5, abs=1e-12)
