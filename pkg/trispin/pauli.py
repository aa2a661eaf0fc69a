"""Pauli operators on a big-endian qubit register"""
import itertools
from functools import reduce
from typing import Dict

import numpy as np

PAULI: Dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

# Spin component index (x, y, z) -> Pauli label
COMPONENTS = ("X", "Y", "Z")

for _matrix in PAULI.values():
    _matrix.setflags(write=False)


def pauli_string(labels: str) -> np.ndarray:
    """Kronecker product of single-qubit Paulis, first letter on the most significant qubit"""
    try:
        factors = [PAULI[letter] for letter in labels.upper()]
    except KeyError as e:
        raise ValueError(f"Pauli label {e.args[0]!r} is not one of I, X, Y, Z") from None
    if not factors:
        raise ValueError("empty Pauli string")
    return reduce(np.kron, factors)


def site_operator(op: str, site: int, n_sites: int) -> np.ndarray:
    """Single-site Pauli `op` acting on `site` (0-based, 0 = most significant)"""
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} out of range for {n_sites} sites")
    labels = ["I"] * n_sites
    labels[site] = op
    return pauli_string("".join(labels))


def pauli_decomposition(matrix: np.ndarray) -> Dict[str, complex]:
    """
    Coefficients h_P = Tr(P H) / 2^n for every Pauli string P, so that
    H = sum_P h_P P. Hermitian input gives real coefficients.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    dim = matrix.shape[0]
    n_sites = dim.bit_length() - 1
    if matrix.shape != (dim, dim) or 2 ** n_sites != dim:
        raise ValueError(f"expected a 2^n x 2^n matrix, got {matrix.shape}")
    coefficients = {}
    for letters in itertools.product("IXYZ", repeat=n_sites):
        label = "".join(letters)
        coefficients[label] = complex(np.trace(pauli_string(label) @ matrix) / dim)
    return coefficients


def pauli_reconstruct(coefficients: Dict[str, complex]) -> np.ndarray:
    terms = [value * pauli_string(label) for label, value in coefficients.items()]
    if not terms:
        raise ValueError("no Pauli coefficients given")
    return sum(terms[1:], terms[0])
