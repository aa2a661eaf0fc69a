import numpy as np
import pytest

from trispin.pauli import PAULI, pauli_decomposition, pauli_reconstruct, pauli_string, site_operator


def test_pauli_algebra():
    x, y, z = PAULI["X"], PAULI["Y"], PAULI["Z"]
    assert np.array_equal(x @ y, 1j * z)
    for p in (x, y, z):
        assert np.array_equal(p @ p, PAULI["I"])


def test_pauli_matrices_are_read_only():
    with pytest.raises(ValueError):
        PAULI["X"][0, 0] = 1


def test_first_letter_acts_on_most_significant_qubit():
    zii = pauli_string("ZII")
    assert np.diag(zii).real.tolist() == [1, 1, 1, 1, -1, -1, -1, -1]
    assert np.array_equal(site_operator("Z", 0, 3), zii)


def test_bad_labels_rejected():
    with pytest.raises(ValueError, match="not one of"):
        pauli_string("XQ")
    with pytest.raises(ValueError, match="empty"):
        pauli_string("")
    with pytest.raises(ValueError, match="out of range"):
        site_operator("X", 3, 3)


def test_decomposition_round_trip_on_random_hermitian():
    generator = np.random.default_rng(5)
    m = generator.normal(size=(8, 8)) + 1j * generator.normal(size=(8, 8))
    h = (m + m.conj().T) / 2
    coefficients = pauli_decomposition(h)
    assert len(coefficients) == 64
    assert max(abs(v.imag) for v in coefficients.values()) <= 1e-14
    assert np.max(np.abs(pauli_reconstruct(coefficients) - h)) <= 1e-13


def test_decomposition_of_single_string():
    coefficients = pauli_decomposition(2.5 * pauli_string("XIZ"))
    assert coefficients["XIZ"] == pytest.approx(2.5)
    assert sum(abs(v) for label, v in coefficients.items() if label != "XIZ") == pytest.approx(0.0)


def test_decomposition_rejects_non_qubit_shape():
    with pytest.raises(ValueError, match="2\\^n"):
        pauli_decomposition(np.eye(3))
